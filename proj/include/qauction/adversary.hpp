#pragma once

// Corrupt-auctioneer attacks and the bidders' countermeasures.

#include "qauction/core.hpp"
#include "qauction/protocol.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace qauction {

class Povm {
public:
    /// Validates PSD elements summing to the identity (tolerance 1e-9).
    explicit Povm(std::vector<Matrix> elements);

    const std::vector<Matrix>& elements() const { return elements_; }
    std::size_t size() const { return elements_.size(); }
    std::size_t dimension() const { return static_cast<std::size_t>(elements_.front().rows()); }

private:
    std::vector<Matrix> elements_;
};

/// Per-bidder locking unitaries for a two-bidder auction.
struct LockingPair {
    double theta1 = 0.0;
    double theta2 = 0.0;
    double alpha1 = 0.0;
    double alpha2 = 0.0;
    DenseOperator v1;
    DenseOperator v2;

    /// beta_i = (cos theta_i - sin theta_i) / sqrt2.
    double beta1() const;
    double beta2() const;
    /// V1 (x) V2.
    DenseOperator joint() const;
};

/// V = F ROT(i_min, theta) F with F the CNOT fan-out of `bid` and
/// theta = arcsin(alpha) - pi/4, so V^dagger (|0>+|b>)/sqrt2 = alpha|0> - beta|b>.
DenseOperator locking_operator(double alpha, const BidSpec& bid);

LockingPair locking_operators(double alpha1, double alpha2, const BidSpec& bid1, const BidSpec& bid2);

enum class CurveMode { ClosedForm, MonteCarlo };

struct LearningCurve {
    CurveMode mode = CurveMode::ClosedForm;
    std::vector<int> rounds;      // N = 1..max
    std::vector<double> value;    // P(auctioneer knows every bid after N rounds)
    std::vector<double> std_error;  // binomial standard error; 0 for closed forms
    std::size_t trials = 0;
};

struct MonteCarloOptions {
    std::uint64_t seed = 0;
    std::size_t trials = 100000;
    int jobs = 1;
};

/// Probability that one computational-basis measurement of the bidder's
/// (possibly locked) bidding state is not |0...0>.
double basis_revelation_probability(const BidSpec& bid, const std::optional<DenseOperator>& locking);

/// Closed form prod_i (1 - (1 - rho_i)^N).
LearningCurve probe_attack_basis(std::span<const BidSpec> bids,
                                 const std::optional<LockingPair>& locking, int max_rounds);

/// Samples basis measurements of each bidding state round by round; a bidder
/// counts as learned after the first outcome other than |0...0>.
LearningCurve probe_attack_basis_mc(std::span<const BidSpec> bids,
                                    const std::optional<LockingPair>& locking, int max_rounds,
                                    const MonteCarloOptions& options);

struct PovmSearchOptions {
    int restarts = 20;
    std::uint64_t seed = 0;
    double tolerance = 1e-15;
    int max_sweeps = 20000;
};

struct PovmResult {
    Povm povm;
    double error = 0.0;
    int sweeps = 0;
};

/// Minimum-error discrimination by pairwise rotations of an orthonormal
/// measurement basis; outcome j is the guess "state j".
PovmResult min_error_povm(std::span<const StateVector> states, std::span<const double> priors,
                          const PovmSearchOptions& options = {});

/// 1 - sum_i p_i <psi_i|Pi_i|psi_i>.
double povm_error(const Povm& povm, std::span<const StateVector> states, std::span<const double> priors);

struct OptimalityReport {
    double hermitian_residual = 0.0;  // max |Gamma - Gamma^dagger|
    double min_eigenvalue = 0.0;      // min_j lambda_min(Gamma - p_j rho_j)
    bool optimal = false;
};

/// Gamma = sum_i p_i Pi_i rho_i must be Hermitian and dominate every p_j rho_j.
OptimalityReport povm_optimality_report(const Povm& povm, std::span<const StateVector> states,
                                        std::span<const double> priors, double tol = 1e-8);
bool povm_optimality_check(const Povm& povm, std::span<const StateVector> states,
                           std::span<const double> priors, double tol = 1e-8);

/// Bidding states for every nonzero bid of `width` bits, optionally locked
/// with amplitude `alpha`; ascending bid value.
std::vector<StateVector> bid_hypotheses(int width, std::optional<double> alpha = std::nullopt);

/// (1 - P_e^N)^2.
LearningCurve probe_attack_povm(int max_rounds, double error_probability);
/// prod_i (1 - P_e,i^N).
LearningCurve probe_attack_povm(int max_rounds, std::span<const double> error_probabilities);

/// Majority vote over N POVM outcomes per bidder; ties go to the label seen
/// first. `outcome_probabilities[i]` is bidder i's outcome distribution and
/// `truth[i]` the correct label.
LearningCurve probe_attack_povm_mc(std::span<const std::vector<double>> outcome_probabilities,
                                   std::span<const std::size_t> truth, int max_rounds,
                                   const MonteCarloOptions& options);

/// F(x) = sum of register values (rewards revealing states).
PayoffTable spurious_table(const AuctionConfig& config = AuctionConfig(2, 2));

Trajectory run_locked_auction(std::span<const BidSpec> bids, const PayoffTable& table,
                              AdiabaticSchedule schedule, const LockingPair& locking);

/// Basis index of the state where every bidder's register holds its bid.
std::size_t revealing_index(std::span<const BidSpec> bids);

/// Honest bidders, spurious table; success measured on the revealing state.
Trajectory run_spurious_attack(std::span<const BidSpec> bids, const AdiabaticSchedule& schedule);

/// Search driven by the collusion circuit's unitary in place of U1 (x) U2.
Trajectory run_collusion_defense(std::span<const BidSpec> bids, const PayoffTable& table,
                                 const AdiabaticSchedule& schedule);

}  // namespace qauction
