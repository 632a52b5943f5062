#include "qauction/adversary.hpp"

#include "qauction/circuits.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <thread>

namespace qauction {

namespace {

constexpr std::size_t kChunk = 4096;

void check_rounds(int max_rounds) {
    if (max_rounds < 1) {
        throw ContractViolation("learning curves need N >= 1");
    }
}

LearningCurve closed_curve(int max_rounds, const std::function<double(int)>& fn) {
    check_rounds(max_rounds);
    LearningCurve c;
    c.mode = CurveMode::ClosedForm;
    for (int n = 1; n <= max_rounds; ++n) {
        c.rounds.push_back(n);
        c.value.push_back(fn(n));
        c.std_error.push_back(0.0);
    }
    return c;
}

// Runs `body(rng, trials_in_chunk, hits)` over fixed-size chunks. `hits` has
// one slot per round. Chunk seeds depend only on (seed, chunk), so the sum is
// independent of the thread count.
LearningCurve chunked_mc(int max_rounds, const MonteCarloOptions& options,
                         const std::function<void(std::mt19937_64&, std::size_t, std::vector<std::size_t>&)>& body) {
    check_rounds(max_rounds);
    if (options.trials == 0) {
        throw ContractViolation("Monte Carlo needs at least one trial");
    }
    const std::size_t chunks = (options.trials + kChunk - 1) / kChunk;
    std::vector<std::vector<std::size_t>> hits(chunks, std::vector<std::size_t>(static_cast<std::size_t>(max_rounds), 0));
    auto run_chunk = [&](std::size_t c) {
        std::mt19937_64 rng(derive_seed(options.seed, c));
        const std::size_t n = std::min(kChunk, options.trials - c * kChunk);
        body(rng, n, hits[c]);
    };
    const auto jobs = static_cast<std::size_t>(std::max(1, options.jobs));
    if (jobs == 1 || chunks == 1) {
        for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < std::min(jobs, chunks); ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t c = w; c < chunks; c += jobs) run_chunk(c);
            });
        }
        for (auto& t : pool) t.join();
    }
    LearningCurve curve;
    curve.mode = CurveMode::MonteCarlo;
    curve.trials = options.trials;
    const auto total = static_cast<double>(options.trials);
    for (int n = 1; n <= max_rounds; ++n) {
        std::size_t sum = 0;
        for (const auto& h : hits) sum += h[static_cast<std::size_t>(n - 1)];
        const double p = static_cast<double>(sum) / total;
        curve.rounds.push_back(n);
        curve.value.push_back(p);
        curve.std_error.push_back(std::sqrt(p * (1.0 - p) / total));
    }
    return curve;
}

std::vector<std::optional<DenseOperator>> per_bidder_locks(std::span<const BidSpec> bids,
                                                           const std::optional<LockingPair>& locking) {
    std::vector<std::optional<DenseOperator>> out(bids.size());
    if (locking) {
        if (bids.size() != 2) {
            throw ContractViolation("locking pairs apply to two-bidder auctions");
        }
        out[0] = locking->v1;
        out[1] = locking->v2;
    }
    return out;
}

StateVector bidding_state(const BidSpec& bid, const std::optional<DenseOperator>& locking) {
    StateVector psi = bidding_operator(bid) * StateVector::basis(bid.width(), 0);
    if (locking) {
        if (locking->dimension() != psi.dimension()) {
            throw ContractViolation("locking operator dimension differs from the bid register");
        }
        psi = locking->adjoint() * psi;
    }
    return psi;
}

Matrix random_unitary(std::size_t dim, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            g(i, j) = Complex(normal(rng), normal(rng));
        }
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mag = std::abs(r(i, i));
        if (mag > 0.0) q.col(i) *= r(i, i) / mag;
    }
    return q;
}

struct SweepOutcome {
    Matrix basis;
    double success = 0.0;
    int sweeps = 0;
};

double success_of(const Matrix& m, const std::vector<Vector>& psi, std::span<const double> priors) {
    double s = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        s += priors[i] * std::norm(m.col(static_cast<Eigen::Index>(i)).dot(psi[i]));
    }
    return s;
}

SweepOutcome jacobi_search(Matrix m, const std::vector<Vector>& psi, std::span<const double> priors,
                           const PovmSearchOptions& options) {
    const auto dim = m.cols();
    const auto n = static_cast<Eigen::Index>(psi.size());
    auto prior = [&](Eigen::Index i) { return i < n ? priors[static_cast<std::size_t>(i)] : 0.0; };
    auto overlap = [&](Eigen::Index vec, Eigen::Index state) -> Complex {
        return state < n ? m.col(vec).dot(psi[static_cast<std::size_t>(state)]) : Complex(0.0);
    };
    double current = success_of(m, psi, priors);
    int sweep = 0;
    while (sweep < options.max_sweeps) {
        ++sweep;
        for (Eigen::Index j = 0; j < dim; ++j) {
            for (Eigen::Index k = j + 1; k < dim; ++k) {
                if (j >= n) continue;
                const Complex x = overlap(j, j);
                const Complex y = overlap(k, j);
                const Complex u = overlap(k, k);
                const Complex w = overlap(j, k);
                const double pj = prior(j);
                const double pk = prior(k);
                const double b = 0.5 * (pj * (std::norm(x) - std::norm(y)) + pk * (std::norm(u) - std::norm(w)));
                const Complex z = pj * std::conj(x) * y - pk * u * std::conj(w);
                if (std::abs(z) == 0.0 && b >= 0.0) continue;
                const double phi = 0.5 * std::atan2(std::abs(z), b);
                const Complex e = std::polar(1.0, std::arg(z));
                const double c = std::cos(phi);
                const double s = std::sin(phi);
                const Vector mj = m.col(j);
                const Vector mk = m.col(k);
                m.col(j) = c * mj + e * s * mk;
                m.col(k) = -std::conj(e) * s * mj + c * mk;
            }
        }
        const double next = success_of(m, psi, priors);
        const double gain = next - current;
        current = std::max(current, next);
        if (gain < options.tolerance) break;
    }
    return SweepOutcome{std::move(m), current, sweep};
}

}  // namespace

// --------------------------------------------------------------------- Povm

Povm::Povm(std::vector<Matrix> elements) : elements_(std::move(elements)) {
    if (elements_.empty()) {
        throw ContractViolation("POVM needs at least one element");
    }
    validate_povm(elements_, static_cast<std::size_t>(elements_.front().rows()));
}

// ------------------------------------------------------------------ locking

double LockingPair::beta1() const { return (std::cos(theta1) - std::sin(theta1)) / std::numbers::sqrt2; }
double LockingPair::beta2() const { return (std::cos(theta2) - std::sin(theta2)) / std::numbers::sqrt2; }
DenseOperator LockingPair::joint() const { return tensor_product(v1, v2); }

DenseOperator locking_operator(double alpha, const BidSpec& bid) {
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw ContractViolation("lock amplitude must lie in (0, 1]");
    }
    const double theta = std::asin(alpha) - std::numbers::pi / 4.0;
    const int p = bid.width();
    const std::vector<int> set = bid.set_qubits();
    Circuit c(p);
    for (std::size_t k = 1; k < set.size(); ++k) c.cnot(set.front(), set[k]);
    c.rot(set.front(), theta);
    for (std::size_t k = set.size(); k-- > 1;) c.cnot(set.front(), set[k]);
    return circuit_to_matrix(c);
}

LockingPair locking_operators(double alpha1, double alpha2, const BidSpec& bid1, const BidSpec& bid2) {
    LockingPair pair{std::asin(std::clamp(alpha1, -1.0, 1.0)) - std::numbers::pi / 4.0,
                     std::asin(std::clamp(alpha2, -1.0, 1.0)) - std::numbers::pi / 4.0,
                     alpha1,
                     alpha2,
                     locking_operator(alpha1, bid1),
                     locking_operator(alpha2, bid2)};
    return pair;
}

// ------------------------------------------------------------- basis probe

double basis_revelation_probability(const BidSpec& bid, const std::optional<DenseOperator>& locking) {
    if (!locking) return 0.5;
    return std::clamp(1.0 - bidding_state(bid, locking).probability(0), 0.0, 1.0);
}

LearningCurve probe_attack_basis(std::span<const BidSpec> bids, const std::optional<LockingPair>& locking,
                                 int max_rounds) {
    const auto locks = per_bidder_locks(bids, locking);
    std::vector<double> rho;
    for (std::size_t i = 0; i < bids.size(); ++i) {
        rho.push_back(basis_revelation_probability(bids[i], locks[i]));
    }
    return closed_curve(max_rounds, [&](int n) {
        double v = 1.0;
        for (double r : rho) v *= 1.0 - std::pow(1.0 - r, n);
        return v;
    });
}

LearningCurve probe_attack_basis_mc(std::span<const BidSpec> bids, const std::optional<LockingPair>& locking,
                                    int max_rounds, const MonteCarloOptions& options) {
    const auto locks = per_bidder_locks(bids, locking);
    std::vector<std::vector<double>> probs;
    for (std::size_t i = 0; i < bids.size(); ++i) {
        probs.push_back(bidding_state(bids[i], locks[i]).probabilities());
    }
    const auto rounds = static_cast<std::size_t>(max_rounds);
    return chunked_mc(max_rounds, options, [&](std::mt19937_64& rng, std::size_t trials, std::vector<std::size_t>& hits) {
        for (std::size_t t = 0; t < trials; ++t) {
            std::size_t learned = 0;  // round after which every bidder is known
            for (const auto& p : probs) {
                std::size_t first = rounds + 1;
                for (std::size_t r = 1; r <= rounds; ++r) {
                    if (sample_index(p, rng) != 0) {
                        first = r;
                        break;
                    }
                }
                learned = std::max(learned, first);
            }
            for (std::size_t n = learned; n <= rounds; ++n) {
                if (n >= 1) ++hits[n - 1];
            }
        }
    });
}

// --------------------------------------------------------------------- POVM

PovmResult min_error_povm(std::span<const StateVector> states, std::span<const double> priors,
                          const PovmSearchOptions& options) {
    if (states.empty()) {
        throw ContractViolation("at least one state is required");
    }
    if (priors.size() != states.size()) {
        throw ContractViolation("one prior per state is required");
    }
    double total = 0.0;
    for (double p : priors) {
        if (!(p >= 0.0)) throw ContractViolation("priors must be non-negative");
        total += p;
    }
    if (std::abs(total - 1.0) > tolerance::kPovm) {
        throw ContractViolation("priors must sum to 1");
    }
    const std::size_t d = states.front().dimension();
    for (const StateVector& s : states) {
        if (s.dimension() != d) throw ContractViolation("states have different dimensions");
    }
    if (options.restarts < 1) {
        throw ContractViolation("at least one restart is required");
    }
    const std::size_t big = std::max(d, states.size());
    std::vector<Vector> psi;
    for (const StateVector& s : states) {
        Vector v = Vector::Zero(static_cast<Eigen::Index>(big));
        v.head(static_cast<Eigen::Index>(d)) = s.amplitudes();
        psi.push_back(std::move(v));
    }

    SweepOutcome best;
    bool have = false;
    for (int r = 0; r < options.restarts; ++r) {
        Matrix start;
        if (r == 0) {
            start = Matrix::Identity(static_cast<Eigen::Index>(big), static_cast<Eigen::Index>(big));
        } else {
            std::mt19937_64 rng(derive_seed(options.seed, static_cast<std::uint64_t>(r)));
            start = random_unitary(big, rng);
        }
        SweepOutcome out = jacobi_search(std::move(start), psi, priors, options);
        if (!have || out.success > best.success) {
            best = std::move(out);
            have = true;
        }
    }

    const auto dd = static_cast<Eigen::Index>(d);
    std::vector<Matrix> elements(states.size());
    Matrix rest = Matrix::Identity(dd, dd);
    for (std::size_t i = 1; i < states.size(); ++i) {
        const Vector m = best.basis.col(static_cast<Eigen::Index>(i)).head(dd);
        elements[i] = m * m.adjoint();
        rest -= elements[i];
    }
    elements[0] = 0.5 * (rest + rest.adjoint());
    Povm povm(std::move(elements));
    const double err = povm_error(povm, states, priors);
    return PovmResult{std::move(povm), err, best.sweeps};
}

double povm_error(const Povm& povm, std::span<const StateVector> states, std::span<const double> priors) {
    if (povm.size() < states.size() || priors.size() != states.size()) {
        throw ContractViolation("need one POVM outcome and one prior per state");
    }
    double success = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const Vector& a = states[i].amplitudes();
        success += priors[i] * a.dot(povm.elements()[i] * a).real();
    }
    return std::max(0.0, 1.0 - success);
}

OptimalityReport povm_optimality_report(const Povm& povm, std::span<const StateVector> states,
                                        std::span<const double> priors, double tol) {
    if (povm.size() < states.size() || priors.size() != states.size()) {
        throw ContractViolation("need one POVM outcome and one prior per state");
    }
    const auto d = static_cast<Eigen::Index>(povm.dimension());
    Matrix gamma = Matrix::Zero(d, d);
    std::vector<Matrix> rho;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const Vector& a = states[i].amplitudes();
        rho.push_back(a * a.adjoint());
        gamma += priors[i] * povm.elements()[i] * rho.back();
    }
    OptimalityReport r;
    r.hermitian_residual = (gamma - gamma.adjoint()).cwiseAbs().maxCoeff();
    const Matrix herm = 0.5 * (gamma + gamma.adjoint());
    r.min_eigenvalue = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < states.size(); ++j) {
        Eigen::SelfAdjointEigenSolver<Matrix> solver(herm - priors[j] * rho[j], Eigen::EigenvaluesOnly);
        r.min_eigenvalue = std::min(r.min_eigenvalue, solver.eigenvalues()(0));
    }
    r.optimal = r.hermitian_residual <= tol && r.min_eigenvalue >= -tol;
    return r;
}

bool povm_optimality_check(const Povm& povm, std::span<const StateVector> states,
                           std::span<const double> priors, double tol) {
    return povm_optimality_report(povm, states, priors, tol).optimal;
}

std::vector<StateVector> bid_hypotheses(int width, std::optional<double> alpha) {
    if (width < 1 || width > 12) {
        throw ContractViolation("bid width out of range");
    }
    std::vector<StateVector> out;
    for (std::size_t v = 1; v < (std::size_t{1} << width); ++v) {
        const BidSpec bid = BidSpec::from_value(v, width);
        std::optional<DenseOperator> lock;
        if (alpha) lock = locking_operator(*alpha, bid);
        out.push_back(bidding_state(bid, lock));
    }
    return out;
}

LearningCurve probe_attack_povm(int max_rounds, double error_probability) {
    if (!(error_probability >= 0.0 && error_probability < 1.0)) {
        throw ContractViolation("P_e must lie in [0, 1)");
    }
    return closed_curve(max_rounds, [&](int n) {
        const double v = 1.0 - std::pow(error_probability, n);
        return v * v;
    });
}

LearningCurve probe_attack_povm(int max_rounds, std::span<const double> error_probabilities) {
    for (double pe : error_probabilities) {
        if (!(pe >= 0.0 && pe < 1.0)) throw ContractViolation("P_e must lie in [0, 1)");
    }
    return closed_curve(max_rounds, [&](int n) {
        double v = 1.0;
        for (double pe : error_probabilities) v *= 1.0 - std::pow(pe, n);
        return v;
    });
}

LearningCurve probe_attack_povm_mc(std::span<const std::vector<double>> outcome_probabilities,
                                   std::span<const std::size_t> truth, int max_rounds,
                                   const MonteCarloOptions& options) {
    if (outcome_probabilities.size() != truth.size() || truth.empty()) {
        throw ContractViolation("one outcome distribution and one true label per bidder");
    }
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= outcome_probabilities[i].size()) throw ContractViolation("true label out of range");
    }
    const auto rounds = static_cast<std::size_t>(max_rounds);
    return chunked_mc(max_rounds, options, [&](std::mt19937_64& rng, std::size_t trials, std::vector<std::size_t>& hits) {
        std::vector<char> all_correct(rounds);
        std::vector<std::size_t> count;
        std::vector<std::size_t> first_seen;
        for (std::size_t t = 0; t < trials; ++t) {
            std::fill(all_correct.begin(), all_correct.end(), 1);
            for (std::size_t i = 0; i < truth.size(); ++i) {
                const auto& p = outcome_probabilities[i];
                count.assign(p.size(), 0);
                first_seen.assign(p.size(), rounds);
                for (std::size_t r = 0; r < rounds; ++r) {
                    const std::size_t o = sample_index(p, rng);
                    if (count[o]++ == 0) first_seen[o] = r;
                    std::size_t vote = 0;
                    for (std::size_t l = 1; l < p.size(); ++l) {
                        if (count[l] > count[vote] || (count[l] == count[vote] && first_seen[l] < first_seen[vote])) {
                            vote = l;
                        }
                    }
                    if (vote != truth[i]) all_correct[r] = 0;
                }
            }
            for (std::size_t r = 0; r < rounds; ++r) {
                if (all_correct[r]) ++hits[r];
            }
        }
    });
}

// ------------------------------------------------------ attacks on the search

PayoffTable spurious_table(const AuctionConfig& config) {
    const int n = config.total_qubits();
    std::vector<double> values(std::size_t{1} << n, 0.0);
    for (std::size_t x = 0; x < values.size(); ++x) {
        for (int k = 0; k < config.bidders(); ++k) {
            values[x] += static_cast<double>(config.register_value(x, k));
        }
    }
    return PayoffTable(n, std::move(values));
}

Trajectory run_locked_auction(std::span<const BidSpec> bids, const PayoffTable& table, AdiabaticSchedule schedule,
                              const LockingPair& locking) {
    if (bids.size() != 2) {
        throw ContractViolation("locking pairs apply to two-bidder auctions");
    }
    schedule.variant = Variant::Locked;
    schedule.locking = locking.joint();
    return run_adiabatic(bids, table, schedule);
}

std::size_t revealing_index(std::span<const BidSpec> bids) {
    std::size_t x = 0;
    for (const BidSpec& b : bids) {
        x = (x << b.width()) | b.value();
    }
    return x;
}

Trajectory run_spurious_attack(std::span<const BidSpec> bids, const AdiabaticSchedule& schedule) {
    if (bids.empty()) {
        throw ContractViolation("at least one bidder is required");
    }
    for (const BidSpec& b : bids) {
        if (b.width() != bids.front().width()) throw ContractViolation("bidders must use equal register widths");
    }
    const PayoffTable table = spurious_table(AuctionConfig(static_cast<int>(bids.size()), bids.front().width()));
    SearchOperators ops(joint_bidding_operator(bids), table, schedule.locking);
    return run_search(ops, table, schedule, revealing_index(bids));
}

Trajectory run_collusion_defense(std::span<const BidSpec> bids, const PayoffTable& table,
                                 const AdiabaticSchedule& schedule) {
    if (bids.size() != 2) {
        throw ContractViolation("the collusion circuit is defined for two bidders");
    }
    SearchOperators ops(circuit_to_matrix(build_collusion_circuit(bids[0], bids[1])), table, schedule.locking);
    return run_search(ops, table, schedule);
}

}  // namespace qauction
