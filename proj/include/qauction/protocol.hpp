#pragma once

// Auction encoding and the discrete adiabatic search.

#include "qauction/core.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qauction {

/// Raised when the maximum payoff over plausible allocations is not unique.
class TieError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// m bidders, p qubits each, n items. For a single item the item-index field
/// is empty and all p qubits carry price; for n >= 2 it takes floor(log2 n)+1
/// qubits.
class AuctionConfig {
public:
    AuctionConfig(int bidders, int qubits_per_bidder, int items = 1);

    int bidders() const { return bidders_; }
    int qubits_per_bidder() const { return qubits_per_bidder_; }
    int items() const { return items_; }
    int item_qubits() const;
    int price_qubits() const { return qubits_per_bidder_ - item_qubits(); }
    int total_qubits() const { return bidders_ * qubits_per_bidder_; }

    /// Integer contents of bidder k's register in allocation x.
    std::size_t register_value(std::size_t x, int bidder) const;

private:
    int bidders_;
    int qubits_per_bidder_;
    int items_;
};

class PayoffTable {
public:
    PayoffTable(int n_qubits, std::vector<double> values);

    int n_qubits() const { return n_qubits_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t size() const { return values_.size(); }

private:
    int n_qubits_;
    std::vector<double> values_;
};

/// F(x); throws std::out_of_range when x >= 2^n.
double payoff(const PayoffTable& table, std::size_t x);

/// A bidder's price state |b>, given as a bit string with qubit 0 first.
class BidSpec {
public:
    /// Rejects empty strings, characters other than 0/1, and the all-zero
    /// (null) state.
    explicit BidSpec(std::string_view bits);
    /// `value` written on `width` qubits.
    static BidSpec from_value(std::size_t value, int width);

    const std::string& bits() const { return bits_; }
    int width() const { return static_cast<int>(bits_.size()); }
    std::size_t value() const { return value_; }
    /// Local qubit indices holding a 1, ascending.
    std::vector<int> set_qubits() const;
    int lowest_set_qubit() const { return set_qubits().front(); }

    bool operator==(const BidSpec&) const = default;

private:
    std::string bits_;
    std::size_t value_ = 0;
};

std::vector<BidSpec> parse_bids(std::string_view comma_separated);

PayoffTable build_first_price_table(const AuctionConfig& config);

/// diag(-F).
DenseOperator problem_hamiltonian(const PayoffTable& table);

/// diag(popcount(x)).
DenseOperator hamming_hamiltonian(int n_qubits);

struct PauliZTerm {
    std::vector<int> qubits;  // ascending; empty for the constant term
    double coefficient = 0.0;
};

/// H_p = sum_T c_T prod_{k in T} Z_k with c_T = 2^-N sum_x -F(x) (-1)^{sum_{k in T} x_k}.
/// Zero coefficients are dropped; terms are ordered by subset size, then
/// lexicographically.
std::vector<PauliZTerm> pauli_z_expansion(const PayoffTable& table);

/// Diagonal of sum_T c_T Z_T on n qubits.
std::vector<double> pauli_z_diagonal(std::span<const PauliZTerm> terms, int n_qubits);

/// H on the lowest set qubit, then CNOT fan-out to every other set qubit.
/// First column is (|0...0> + |b>)/sqrt2.
DenseOperator bidding_operator(const BidSpec& bid);

/// U_1 (x) ... (x) U_m.
DenseOperator joint_bidding_operator(std::span<const BidSpec> bids);

/// (U_1 (x) ... (x) U_m)|0...0>.
StateVector initial_superposition(std::span<const BidSpec> bids);

/// Basis indices in the support of the joint bidding state, ascending.
std::vector<std::size_t> plausible_allocations(std::span<const BidSpec> bids);

/// Basis indices where |amplitude| exceeds 1e-12, ascending.
std::vector<std::size_t> support(const StateVector& state);

enum class Variant { Exact, Zeroth, First, Locked };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view name);

struct AdiabaticSchedule {
    int steps = 20;
    double delta = 1.5;
    Variant variant = Variant::Zeroth;
    /// Joint locking unitary V; used by Locked (and by Exact when present).
    std::optional<DenseOperator> locking;

    void validate() const;
    double fraction(int s) const { return static_cast<double>(s) / steps; }

    /// S = 20, Delta = 1.5.
    static AdiabaticSchedule convergence_preset(Variant v = Variant::Zeroth);
    /// S = 40, Delta = 1.
    static AdiabaticSchedule comparison_preset(Variant v = Variant::Zeroth);
    /// Delta = 1/sqrt(S).
    static AdiabaticSchedule sqrt_rule(int steps, Variant v = Variant::Zeroth);
};

/// Everything one iteration needs; diagonal Hamiltonians are stored by their
/// diagonals.
struct SearchOperators {
    DenseOperator bidding;
    std::vector<double> hamming;
    std::vector<double> problem;
    std::optional<DenseOperator> locking;

    SearchOperators(DenseOperator bidding_op, const PayoffTable& table,
                    std::optional<DenseOperator> locking_op = std::nullopt);

    int n_qubits() const { return bidding.n_qubits(); }
    /// U W U^dagger.
    DenseOperator beginning_hamiltonian() const;
    /// V H_p V^dagger (H_p when no locking operator is set).
    DenseOperator final_hamiltonian() const;
    /// (1-f) U W U^dagger + f V H_p V^dagger.
    DenseOperator interpolated_hamiltonian(double f) const;
};

/// One iteration |Psi_{s-1}> -> |Psi_s> with f = s/S.
StateVector adiabatic_step(const StateVector& state, int s, const AdiabaticSchedule& schedule,
                           const SearchOperators& ops);

struct StepRecord {
    int s = 0;
    double f = 0.0;
    StateVector state;
    double success_probability = 0.0;
    double subspace_leakage = 0.0;
};

struct Trajectory {
    std::vector<StepRecord> steps;  // steps[0] is the initial state (s = 0)
    std::size_t winner_index = 0;
    std::vector<std::size_t> plausible;

    const StepRecord& final_step() const { return steps.back(); }
    /// Plausible allocation with the largest final probability.
    std::size_t final_argmax() const;
    /// Basis state with the largest final probability over the whole register.
    std::size_t final_global_argmax() const;
    double max_leakage() const;
};

/// Allocation of maximum payoff among `candidates`; TieError when not unique.
std::size_t winning_allocation(const PayoffTable& table, std::span<const std::size_t> candidates);

/// 1 - sum_{x in subspace} |<x|psi>|^2, clamped at 0.
double subspace_leakage(const StateVector& state, std::span<const std::size_t> subspace);

/// Runs the search from U|0...0> with plausible set = support(U|0...0>).
/// `target` overrides the success target (defaults to the winning allocation).
Trajectory run_search(const SearchOperators& ops, const PayoffTable& table,
                      const AdiabaticSchedule& schedule,
                      std::optional<std::size_t> target = std::nullopt);

Trajectory run_adiabatic(std::span<const BidSpec> bids, const PayoffTable& table,
                         const AdiabaticSchedule& schedule);

struct EigenTracks {
    std::vector<int> s;
    std::vector<double> f;
    std::vector<std::vector<double>> eigenvalues;  // per row, ascending
    std::vector<double> gaps;                      // lambda1 - lambda0 per row
    double g_min = 0.0;
};

/// Spectrum of H(f) for s = 0..S. With `restrict`, H(f) is projected onto the
/// plausible allocations before diagonalizing.
EigenTracks eigenvalue_tracks(const SearchOperators& ops, const AdiabaticSchedule& schedule,
                              bool restrict);
EigenTracks eigenvalue_tracks(std::span<const BidSpec> bids, const PayoffTable& table,
                              const AdiabaticSchedule& schedule, bool restrict);

}  // namespace qauction
