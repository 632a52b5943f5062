#include "qauction/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>

namespace qauction {

// ------------------------------------------------------------ AuctionConfig

AuctionConfig::AuctionConfig(int bidders, int qubits_per_bidder, int items)
    : bidders_(bidders), qubits_per_bidder_(qubits_per_bidder), items_(items) {
    if (bidders < 1 || qubits_per_bidder < 1 || items < 1) {
        throw ContractViolation("auction needs at least one bidder, qubit and item");
    }
    if (price_qubits() < 1) {
        throw ContractViolation("no qubits left for the bid value");
    }
    if (total_qubits() > 24) {
        throw ContractViolation("auction register too large for dense simulation");
    }
}

int AuctionConfig::item_qubits() const {
    if (items_ == 1) {
        return 0;
    }
    return static_cast<int>(std::bit_width(static_cast<unsigned>(items_)));  // floor(log2 n) + 1
}

std::size_t AuctionConfig::register_value(std::size_t x, int bidder) const {
    const int shift = (bidders_ - 1 - bidder) * qubits_per_bidder_;
    const std::size_t mask = (std::size_t{1} << qubits_per_bidder_) - 1;
    return (x >> shift) & mask;
}

// -------------------------------------------------------------- PayoffTable

PayoffTable::PayoffTable(int n_qubits, std::vector<double> values)
    : n_qubits_(n_qubits), values_(std::move(values)) {
    if (n_qubits < 1 || n_qubits > 24) {
        throw ContractViolation("payoff table qubit count out of range");
    }
    if (values_.size() != (std::size_t{1} << n_qubits)) {
        throw ContractViolation("payoff table must have 2^n entries");
    }
    for (double v : values_) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ContractViolation("payoff values must be finite and non-negative");
        }
    }
}

double payoff(const PayoffTable& table, std::size_t x) {
    if (x >= table.size()) {
        throw std::out_of_range("allocation index " + std::to_string(x) + " out of range");
    }
    return table.values()[x];
}

// ------------------------------------------------------------------ BidSpec

BidSpec::BidSpec(std::string_view bits) : bits_(bits) {
    if (bits_.empty() || bits_.size() > 20) {
        throw ContractViolation("bid must have between 1 and 20 bits");
    }
    for (char c : bits_) {
        if (c != '0' && c != '1') {
            throw ContractViolation("bid '" + bits_ + "' contains a character other than 0/1");
        }
        value_ = (value_ << 1) | static_cast<std::size_t>(c == '1');
    }
    if (value_ == 0) {
        throw ContractViolation("the all-zero bid is the null state and cannot be bid");
    }
}

BidSpec BidSpec::from_value(std::size_t value, int width) {
    std::string bits(static_cast<std::size_t>(width), '0');
    for (int q = 0; q < width; ++q) {
        if ((value >> (width - 1 - q)) & 1U) {
            bits[static_cast<std::size_t>(q)] = '1';
        }
    }
    if (width < 1 || (value >> width) != 0) {
        throw ContractViolation("bid value does not fit in the register");
    }
    return BidSpec(bits);
}

std::vector<int> BidSpec::set_qubits() const {
    std::vector<int> out;
    for (std::size_t i = 0; i < bits_.size(); ++i) {
        if (bits_[i] == '1') {
            out.push_back(static_cast<int>(i));
        }
    }
    return out;
}

std::vector<BidSpec> parse_bids(std::string_view comma_separated) {
    std::vector<BidSpec> out;
    std::size_t start = 0;
    while (start <= comma_separated.size()) {
        const std::size_t end = std::min(comma_separated.find(',', start), comma_separated.size());
        std::string_view item = comma_separated.substr(start, end - start);
        while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
        out.emplace_back(item);
        start = end + 1;
    }
    return out;
}

// --------------------------------------------------------------- Hamiltonians

PayoffTable build_first_price_table(const AuctionConfig& config) {
    if (config.items() != 1) {
        throw ContractViolation("first-price table builder supports single-item auctions only");
    }
    const int n = config.total_qubits();
    std::vector<double> values(std::size_t{1} << n, 0.0);
    for (std::size_t x = 0; x < values.size(); ++x) {
        int nonzero = 0;
        std::size_t price = 0;
        for (int k = 0; k < config.bidders(); ++k) {
            const std::size_t v = config.register_value(x, k);
            if (v != 0) {
                ++nonzero;
                price = v;
            }
        }
        values[x] = nonzero == 1 ? static_cast<double>(price) : 0.0;
    }
    return PayoffTable(n, std::move(values));
}

DenseOperator problem_hamiltonian(const PayoffTable& table) {
    std::vector<double> diag(table.values());
    for (double& d : diag) {
        d = -d;
    }
    return DenseOperator::diagonal(diag);
}

namespace {

std::vector<double> hamming_diagonal(int n_qubits) {
    std::vector<double> diag(std::size_t{1} << n_qubits);
    for (std::size_t x = 0; x < diag.size(); ++x) {
        diag[x] = std::popcount(x);
    }
    return diag;
}

}  // namespace

DenseOperator hamming_hamiltonian(int n_qubits) {
    if (n_qubits < 1) {
        throw ContractViolation("hamming_hamiltonian needs at least one qubit");
    }
    return DenseOperator::diagonal(hamming_diagonal(n_qubits));
}

std::vector<PauliZTerm> pauli_z_expansion(const PayoffTable& table) {
    const int n = table.n_qubits();
    // Walsh-Hadamard transform of -F; coefficient for mask m (bit n-1-k set
    // for qubit k) is 2^-n sum_x -F(x) (-1)^{popcount(x & m)}.
    std::vector<double> w(table.values());
    for (double& v : w) {
        v = -v;
    }
    for (std::size_t len = 1; len < w.size(); len <<= 1) {
        for (std::size_t i = 0; i < w.size(); i += 2 * len) {
            for (std::size_t j = i; j < i + len; ++j) {
                const double a = w[j];
                const double b = w[j + len];
                w[j] = a + b;
                w[j + len] = a - b;
            }
        }
    }
    const double scale = 1.0 / static_cast<double>(w.size());
    std::vector<PauliZTerm> terms;
    for (std::size_t mask = 0; mask < w.size(); ++mask) {
        const double c = w[mask] * scale;
        if (c == 0.0) {
            continue;
        }
        PauliZTerm term;
        for (int k = 0; k < n; ++k) {
            if ((mask >> (n - 1 - k)) & 1U) {
                term.qubits.push_back(k);
            }
        }
        term.coefficient = c;
        terms.push_back(std::move(term));
    }
    std::sort(terms.begin(), terms.end(), [](const PauliZTerm& a, const PauliZTerm& b) {
        if (a.qubits.size() != b.qubits.size()) {
            return a.qubits.size() < b.qubits.size();
        }
        return a.qubits < b.qubits;
    });
    return terms;
}

std::vector<double> pauli_z_diagonal(std::span<const PauliZTerm> terms, int n_qubits) {
    std::vector<double> diag(std::size_t{1} << n_qubits, 0.0);
    for (std::size_t x = 0; x < diag.size(); ++x) {
        for (const PauliZTerm& t : terms) {
            int parity = 0;
            for (int q : t.qubits) {
                parity ^= qubit_bit(x, q, n_qubits);
            }
            diag[x] += parity ? -t.coefficient : t.coefficient;
        }
    }
    return diag;
}

// ---------------------------------------------------------- bidding states

DenseOperator bidding_operator(const BidSpec& bid) {
    const int p = bid.width();
    const std::size_t dim = std::size_t{1} << p;
    const int lead = bid.lowest_set_qubit();
    const std::size_t lead_mask = std::size_t{1} << (p - 1 - lead);
    const std::size_t fanout_mask = bid.value() ^ lead_mask;
    const double h = 1.0 / std::numbers::sqrt2;

    auto fan_out = [&](std::size_t y) { return (y & lead_mask) ? (y ^ fanout_mask) : y; };

    Matrix u = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t x = 0; x < dim; ++x) {
        const auto col = static_cast<Eigen::Index>(x);
        const std::size_t low = x & ~lead_mask;
        const std::size_t high = x | lead_mask;
        const double sign = (x & lead_mask) ? -1.0 : 1.0;
        u(static_cast<Eigen::Index>(fan_out(low)), col) += h;
        u(static_cast<Eigen::Index>(fan_out(high)), col) += sign * h;
    }
    return DenseOperator(std::move(u));
}

DenseOperator joint_bidding_operator(std::span<const BidSpec> bids) {
    if (bids.empty()) {
        throw ContractViolation("at least one bidder is required");
    }
    DenseOperator u = bidding_operator(bids.front());
    for (std::size_t j = 1; j < bids.size(); ++j) {
        u = tensor_product(u, bidding_operator(bids[j]));
    }
    return u;
}

StateVector initial_superposition(std::span<const BidSpec> bids) {
    if (bids.empty()) {
        throw ContractViolation("at least one bidder is required");
    }
    StateVector psi = bidding_operator(bids.front()) * StateVector::basis(bids.front().width(), 0);
    for (std::size_t j = 1; j < bids.size(); ++j) {
        psi = tensor_product(psi, bidding_operator(bids[j]) * StateVector::basis(bids[j].width(), 0));
    }
    return psi;
}

std::vector<std::size_t> plausible_allocations(std::span<const BidSpec> bids) {
    std::vector<std::size_t> out{0};
    for (const BidSpec& bid : bids) {
        std::vector<std::size_t> next;
        next.reserve(out.size() * 2);
        for (std::size_t prefix : out) {
            next.push_back(prefix << bid.width());
            next.push_back((prefix << bid.width()) | bid.value());
        }
        out = std::move(next);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::size_t> support(const StateVector& state) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < state.dimension(); ++i) {
        if (std::abs(state.amplitudes()(static_cast<Eigen::Index>(i))) > 1e-12) {
            out.push_back(i);
        }
    }
    return out;
}

// ---------------------------------------------------------------- schedule

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::Exact: return "exact";
        case Variant::Zeroth: return "zeroth";
        case Variant::First: return "first";
        case Variant::Locked: return "locked";
    }
    return "unknown";
}

Variant parse_variant(std::string_view name) {
    if (name == "exact") return Variant::Exact;
    if (name == "zeroth") return Variant::Zeroth;
    if (name == "first") return Variant::First;
    if (name == "locked") return Variant::Locked;
    throw ContractViolation("unknown integrator variant '" + std::string(name) + "'");
}

void AdiabaticSchedule::validate() const {
    if (steps < 1) {
        throw ContractViolation("schedule needs at least one step");
    }
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw ContractViolation("step size must be positive and finite");
    }
    if (variant == Variant::Locked && !locking) {
        throw ContractViolation("locked variant requires a locking operator");
    }
}

AdiabaticSchedule AdiabaticSchedule::convergence_preset(Variant v) {
    return AdiabaticSchedule{20, 1.5, v, std::nullopt};
}

AdiabaticSchedule AdiabaticSchedule::comparison_preset(Variant v) {
    return AdiabaticSchedule{40, 1.0, v, std::nullopt};
}

AdiabaticSchedule AdiabaticSchedule::sqrt_rule(int steps, Variant v) {
    if (steps < 1) {
        throw ContractViolation("schedule needs at least one step");
    }
    return AdiabaticSchedule{steps, 1.0 / std::sqrt(static_cast<double>(steps)), v, std::nullopt};
}

// ------------------------------------------------------------------ search

SearchOperators::SearchOperators(DenseOperator bidding_op, const PayoffTable& table,
                                 std::optional<DenseOperator> locking_op)
    : bidding(std::move(bidding_op)),
      hamming(hamming_diagonal(bidding.n_qubits())),
      problem(table.values()),
      locking(std::move(locking_op)) {
    if (table.n_qubits() != bidding.n_qubits()) {
        throw ContractViolation("payoff table and bidding operator act on different registers");
    }
    if (locking && locking->dimension() != bidding.dimension()) {
        throw ContractViolation("locking operator dimension mismatch");
    }
    for (double& v : problem) {
        v = -v;
    }
}

DenseOperator SearchOperators::beginning_hamiltonian() const {
    const Matrix& u = bidding.matrix();
    return DenseOperator(u * RealVector::Map(hamming.data(), static_cast<Eigen::Index>(hamming.size()))
                                 .cast<Complex>()
                                 .asDiagonal() *
                         u.adjoint());
}

DenseOperator SearchOperators::final_hamiltonian() const {
    const Vector diag = RealVector::Map(problem.data(), static_cast<Eigen::Index>(problem.size())).cast<Complex>();
    if (!locking) {
        return DenseOperator::diagonal(diag);
    }
    const Matrix& v = locking->matrix();
    return DenseOperator(v * diag.asDiagonal() * v.adjoint());
}

DenseOperator SearchOperators::interpolated_hamiltonian(double f) const {
    return DenseOperator((1.0 - f) * beginning_hamiltonian().matrix() + f * final_hamiltonian().matrix());
}

namespace {

void apply_phases(Vector& psi, const std::vector<double>& diagonal, double tau) {
    for (Eigen::Index i = 0; i < psi.size(); ++i) {
        psi(i) *= std::exp(Complex(0.0, -tau * diagonal[static_cast<std::size_t>(i)]));
    }
}

// psi <- U e^{-i tau W} U^dagger psi
void apply_beginning(Vector& psi, const SearchOperators& ops, double tau) {
    const Matrix& u = ops.bidding.matrix();
    Vector tmp = u.adjoint() * psi;
    apply_phases(tmp, ops.hamming, tau);
    psi.noalias() = u * tmp;
}

// psi <- V e^{-i tau H_p} V^dagger psi  (V = I when `locked` is false)
void apply_final(Vector& psi, const SearchOperators& ops, double tau, bool locked) {
    if (!locked) {
        apply_phases(psi, ops.problem, tau);
        return;
    }
    const Matrix& v = ops.locking->matrix();
    Vector tmp = v.adjoint() * psi;
    apply_phases(tmp, ops.problem, tau);
    psi.noalias() = v * tmp;
}

}  // namespace

StateVector adiabatic_step(const StateVector& state, int s, const AdiabaticSchedule& schedule,
                           const SearchOperators& ops) {
    schedule.validate();
    if (state.dimension() != ops.bidding.dimension()) {
        throw ContractViolation("state and search operators act on different registers");
    }
    if (schedule.variant == Variant::Locked && !ops.locking) {
        throw ContractViolation("locked variant requires a locking operator");
    }
    const double f = schedule.fraction(s);
    const double delta = schedule.delta;
    Vector psi = state.amplitudes();
    switch (schedule.variant) {
        case Variant::Exact: {
            const DenseOperator h = ops.interpolated_hamiltonian(f);
            psi = evolve_hermitian(h, delta).matrix() * psi;
            break;
        }
        case Variant::Zeroth:
            apply_final(psi, ops, delta * f, false);
            apply_beginning(psi, ops, delta * (1.0 - f));
            break;
        case Variant::First:
            apply_beginning(psi, ops, 0.5 * delta * (1.0 - f));
            apply_final(psi, ops, delta * f, false);
            apply_beginning(psi, ops, 0.5 * delta * (1.0 - f));
            break;
        case Variant::Locked:
            apply_final(psi, ops, delta * f, true);
            apply_beginning(psi, ops, delta * (1.0 - f));
            break;
    }
    return StateVector(std::move(psi));
}

std::size_t Trajectory::final_argmax() const {
    const StateVector& psi = final_step().state;
    std::size_t best = plausible.front();
    for (std::size_t x : plausible) {
        if (psi.probability(x) > psi.probability(best)) {
            best = x;
        }
    }
    return best;
}

std::size_t Trajectory::final_global_argmax() const {
    const std::vector<double> p = final_step().state.probabilities();
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

double Trajectory::max_leakage() const {
    double worst = 0.0;
    for (const StepRecord& r : steps) {
        worst = std::max(worst, r.subspace_leakage);
    }
    return worst;
}

std::size_t winning_allocation(const PayoffTable& table, std::span<const std::size_t> candidates) {
    if (candidates.empty()) {
        throw ContractViolation("no candidate allocations");
    }
    double best = -std::numeric_limits<double>::infinity();
    std::size_t winner = candidates.front();
    int count = 0;
    for (std::size_t x : candidates) {
        const double v = payoff(table, x);
        if (v > best) {
            best = v;
            winner = x;
            count = 1;
        } else if (v == best) {
            ++count;
        }
    }
    if (count > 1) {
        throw TieError("maximum payoff " + std::to_string(best) + " is shared by " +
                       std::to_string(count) + " plausible allocations");
    }
    return winner;
}

double subspace_leakage(const StateVector& state, std::span<const std::size_t> subspace) {
    double inside = 0.0;
    for (std::size_t x : subspace) {
        inside += state.probability(x);
    }
    return std::max(0.0, 1.0 - inside);
}

Trajectory run_search(const SearchOperators& ops, const PayoffTable& table,
                      const AdiabaticSchedule& schedule, std::optional<std::size_t> target) {
    schedule.validate();
    StateVector psi = ops.bidding * StateVector::basis(ops.n_qubits(), 0);
    Trajectory traj;
    traj.plausible = support(psi);
    traj.winner_index = target ? *target : winning_allocation(table, traj.plausible);
    if (traj.winner_index >= psi.dimension()) {
        throw std::out_of_range("target allocation out of range");
    }
    traj.steps.reserve(static_cast<std::size_t>(schedule.steps) + 1);
    auto record = [&](int s, const StateVector& state) {
        traj.steps.push_back(StepRecord{s, schedule.fraction(s), state,
                                        state.probability(traj.winner_index),
                                        subspace_leakage(state, traj.plausible)});
    };
    record(0, psi);
    for (int s = 1; s <= schedule.steps; ++s) {
        psi = adiabatic_step(psi, s, schedule, ops);
        record(s, psi);
    }
    return traj;
}

Trajectory run_adiabatic(std::span<const BidSpec> bids, const PayoffTable& table,
                         const AdiabaticSchedule& schedule) {
    SearchOperators ops(joint_bidding_operator(bids), table, schedule.locking);
    return run_search(ops, table, schedule);
}

EigenTracks eigenvalue_tracks(const SearchOperators& ops, const AdiabaticSchedule& schedule,
                              bool restrict) {
    schedule.validate();
    const std::vector<std::size_t> subspace = support(ops.bidding * StateVector::basis(ops.n_qubits(), 0));
    const DenseOperator hb = ops.beginning_hamiltonian();
    const DenseOperator hf = ops.final_hamiltonian();
    EigenTracks out;
    out.g_min = std::numeric_limits<double>::infinity();
    for (int s = 0; s <= schedule.steps; ++s) {
        const double f = schedule.fraction(s);
        Matrix h = (1.0 - f) * hb.matrix() + f * hf.matrix();
        if (restrict) {
            const auto k = static_cast<Eigen::Index>(subspace.size());
            Matrix r(k, k);
            for (Eigen::Index i = 0; i < k; ++i) {
                for (Eigen::Index j = 0; j < k; ++j) {
                    r(i, j) = h(static_cast<Eigen::Index>(subspace[static_cast<std::size_t>(i)]),
                                static_cast<Eigen::Index>(subspace[static_cast<std::size_t>(j)]));
                }
            }
            h = std::move(r);
        }
        Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
        const RealVector& ev = solver.eigenvalues();
        out.s.push_back(s);
        out.f.push_back(f);
        out.eigenvalues.emplace_back(ev.data(), ev.data() + ev.size());
        const double gap = ev.size() > 1 ? ev(1) - ev(0) : 0.0;
        out.gaps.push_back(gap);
        out.g_min = std::min(out.g_min, gap);
    }
    return out;
}

EigenTracks eigenvalue_tracks(std::span<const BidSpec> bids, const PayoffTable& table,
                              const AdiabaticSchedule& schedule, bool restrict) {
    SearchOperators ops(joint_bidding_operator(bids), table, schedule.locking);
    return eigenvalue_tracks(ops, schedule, restrict);
}

}  // namespace qauction
