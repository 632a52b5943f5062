#include "qauction/protocol.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>

using namespace qauction;

namespace {

PayoffTable toy_table() { return build_first_price_table(AuctionConfig(2, 2)); }

std::vector<BidSpec> bids(std::initializer_list<const char*> list) {
    std::vector<BidSpec> out;
    for (const char* b : list) out.emplace_back(b);
    return out;
}

double state_error(const StateVector& a, const StateVector& b) { return (a.amplitudes() - b.amplitudes()).norm(); }

// Dense iteration matrix for one step, built from the oracle helpers.
oracle::M oracle_step(const oracle::M& u, const std::vector<double>& w, const std::vector<double>& hp, double delta,
                      double f, Variant v) {
    const oracle::M W = oracle::diag(w);
    const oracle::M H = oracle::diag(hp);
    const oracle::M hb = u * W * u.adjoint();
    switch (v) {
        case Variant::Exact: return oracle::evolve((1 - f) * hb + f * H, delta);
        case Variant::Zeroth: return u * oracle::evolve(W, delta * (1 - f)) * u.adjoint() * oracle::evolve(H, delta * f);
        case Variant::First: {
            const oracle::M half = u * oracle::evolve(W, 0.5 * delta * (1 - f)) * u.adjoint();
            return half * oracle::evolve(H, delta * f) * half;
        }
        default: return oracle::M();
    }
}

std::vector<double> negated(const std::vector<double>& f) {
    std::vector<double> out(f);
    for (double& x : out) x = -x;
    return out;
}

std::vector<double> popcounts(int n) {
    std::vector<double> w(std::size_t{1} << n);
    for (std::size_t x = 0; x < w.size(); ++x) w[x] = std::popcount(x);
    return w;
}

}  // namespace

TEST(AuctionConfig, ItemQubits) {
    EXPECT_EQ(AuctionConfig(2, 2, 1).item_qubits(), 0);
    EXPECT_EQ(AuctionConfig(2, 2, 1).price_qubits(), 2);
    EXPECT_EQ(AuctionConfig(2, 3, 2).item_qubits(), 2);
    EXPECT_EQ(AuctionConfig(2, 3, 3).item_qubits(), 2);
    EXPECT_EQ(AuctionConfig(2, 4, 4).item_qubits(), 3);
    EXPECT_THROW(AuctionConfig(2, 2, 2), ContractViolation);
    EXPECT_THROW(AuctionConfig(0, 2), ContractViolation);
}

TEST(Payoff, ToyRows) {
    const PayoffTable t = toy_table();
    EXPECT_EQ(payoff(t, 0b0011), 3.0);
    EXPECT_EQ(payoff(t, 0b0101), 0.0);
    EXPECT_EQ(payoff(t, 0b0000), 0.0);
    EXPECT_THROW(payoff(t, 16), std::out_of_range);
}

TEST(FirstPriceTable, ToyMatchesHandTable) {
    EXPECT_EQ(toy_table().values(), oracle::toy_first_price());
}

TEST(FirstPriceTable, SingleBidderSingleQubit) {
    const PayoffTable t = build_first_price_table(AuctionConfig(1, 1));
    EXPECT_EQ(t.values(), (std::vector<double>{0.0, 1.0}));
}

TEST(FirstPriceTable, ThreeBiddersBruteForce) {
    const PayoffTable t = build_first_price_table(AuctionConfig(3, 2));
    EXPECT_EQ(payoff(t, 0b000010), 2.0);
    for (std::size_t x = 0; x < 64; ++x) {
        const std::size_t regs[3] = {(x >> 4) & 3, (x >> 2) & 3, x & 3};
        int nonzero = 0;
        double value = 0;
        for (std::size_t r : regs) {
            if (r) {
                ++nonzero;
                value = static_cast<double>(r);
            }
        }
        EXPECT_EQ(payoff(t, x), nonzero == 1 ? value : 0.0) << x;
    }
}

TEST(PayoffTable, RejectsNegativeOrMisSized) {
    EXPECT_THROW(PayoffTable(2, {0, 1, 2}), ContractViolation);
    EXPECT_THROW(PayoffTable(1, {0, -1}), ContractViolation);
}

TEST(ProblemHamiltonian, ToyDiagonal) {
    const DenseOperator h = problem_hamiltonian(toy_table());
    const std::vector<double> expect{0, -1, -2, -3, -1, 0, 0, 0, -2, 0, 0, 0, -3, 0, 0, 0};
    EXPECT_TRUE(h.is_diagonal());
    for (std::size_t x = 0; x < 16; ++x) EXPECT_EQ(h(x, x).real(), expect[x]);
}

TEST(ProblemHamiltonian, ZeroTable) {
    const DenseOperator h = problem_hamiltonian(PayoffTable(2, {0, 0, 0, 0}));
    EXPECT_EQ(h.matrix().cwiseAbs().maxCoeff(), 0.0);
}

TEST(HammingHamiltonian, Diagonals) {
    const std::vector<double> w4{0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4};
    const DenseOperator h4 = hamming_hamiltonian(4);
    for (std::size_t x = 0; x < 16; ++x) EXPECT_EQ(h4(x, x).real(), w4[x]);
    EXPECT_EQ(hamming_hamiltonian(1)(1, 1).real(), 1.0);
    const DenseOperator h2 = hamming_hamiltonian(2);
    EXPECT_EQ(h2(3, 3).real(), 2.0);
    EXPECT_EQ(h2(0, 0).real(), 0.0);
}

TEST(PauliZExpansion, ToyCoefficients) {
    const auto terms = pauli_z_expansion(toy_table());
    auto coeff = [&](std::vector<int> q) {
        for (const auto& t : terms)
            if (t.qubits == q) return t.coefficient;
        return 0.0;
    };
    EXPECT_NEAR(coeff({}), -12.0 / 16, 1e-15);
    EXPECT_NEAR(coeff({0}), -2.0 / 16, 1e-15);
    EXPECT_NEAR(coeff({0, 1}), -6.0 / 16, 1e-15);
    EXPECT_NEAR(coeff({0, 1, 2}), 4.0 / 16, 1e-15);
}

TEST(PauliZExpansion, MatchesBruteForceProjection) {
    const auto f = oracle::toy_first_price();
    const auto terms = pauli_z_expansion(toy_table());
    for (const auto& t : terms) {
        EXPECT_NEAR(t.coefficient, oracle::pauli_coefficient(f, 4, t.qubits), 1e-15);
    }
    std::size_t nonzero = 0;
    for (unsigned mask = 0; mask < 16; ++mask) {
        std::vector<int> subset;
        for (int q = 0; q < 4; ++q)
            if (mask & (8U >> q)) subset.push_back(q);
        if (oracle::pauli_coefficient(f, 4, subset) != 0.0) ++nonzero;
    }
    EXPECT_EQ(terms.size(), nonzero);
}

TEST(PauliZExpansion, ConstantTable) {
    const auto terms = pauli_z_expansion(PayoffTable(2, {1, 1, 1, 1}));
    ASSERT_EQ(terms.size(), 1u);
    EXPECT_TRUE(terms[0].qubits.empty());
    EXPECT_DOUBLE_EQ(terms[0].coefficient, -1.0);
}

TEST(PauliZExpansion, PopcountTable) {
    const auto terms = pauli_z_expansion(PayoffTable(2, {0, 1, 1, 2}));
    ASSERT_EQ(terms.size(), 3u);
    EXPECT_DOUBLE_EQ(terms[0].coefficient, -1.0);
    EXPECT_EQ(terms[1].qubits, std::vector<int>{0});
    EXPECT_DOUBLE_EQ(terms[1].coefficient, 0.5);
    EXPECT_EQ(terms[2].qubits, std::vector<int>{1});
    EXPECT_DOUBLE_EQ(terms[2].coefficient, 0.5);
}

TEST(PauliZExpansion, ReconstructsExactly) {
    std::mt19937_64 rng(3);
    for (int n : {2, 4, 6}) {
        std::vector<double> f(std::size_t{1} << n);
        for (double& v : f) v = std::floor(uniform01(rng) * 10.0);
        const PayoffTable t(n, f);
        const auto diag = pauli_z_diagonal(pauli_z_expansion(t), n);
        for (std::size_t x = 0; x < f.size(); ++x) EXPECT_LE(std::abs(diag[x] + f[x]), 1e-12);
    }
}

TEST(BidSpec, Validation) {
    EXPECT_THROW(BidSpec("00"), ContractViolation);
    EXPECT_THROW(BidSpec(""), ContractViolation);
    EXPECT_THROW(BidSpec("12"), ContractViolation);
    const BidSpec b("0101");
    EXPECT_EQ(b.value(), 5u);
    EXPECT_EQ(b.set_qubits(), (std::vector<int>{1, 3}));
    EXPECT_EQ(b.lowest_set_qubit(), 1);
    EXPECT_EQ(BidSpec::from_value(3, 2), BidSpec("11"));
    EXPECT_EQ(parse_bids("10, 11").size(), 2u);
}

TEST(BiddingOperator, HandWrittenMatrices) {
    EXPECT_LE((bidding_operator(BidSpec("01")).matrix() - oracle::u1()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((bidding_operator(BidSpec("10")).matrix() - oracle::u2()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((bidding_operator(BidSpec("11")).matrix() - oracle::u3()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BiddingOperator, SixQubitFirstColumn) {
    const DenseOperator u = bidding_operator(BidSpec("010101"));
    EXPECT_TRUE(u.is_unitary());
    for (std::size_t x = 0; x < 64; ++x) {
        const double expect = (x == 0 || x == 0b010101) ? 1.0 / std::sqrt(2.0) : 0.0;
        EXPECT_NEAR(u(x, 0).real(), expect, 1e-15);
        EXPECT_EQ(u(x, 0).imag(), 0.0);
    }
}

TEST(BiddingOperator, UnitaryForEveryBid) {
    for (std::size_t v = 1; v < 32; ++v) {
        EXPECT_TRUE(bidding_operator(BidSpec::from_value(v, 5)).is_unitary()) << v;
    }
}

TEST(InitialSuperposition, Examples) {
    const StateVector a = initial_superposition(bids({"10", "11"}));
    for (std::size_t x = 0; x < 16; ++x) {
        const bool in = x == 0b0000 || x == 0b0011 || x == 0b1000 || x == 0b1011;
        EXPECT_NEAR(a.amplitude(x).real(), in ? 0.5 : 0.0, 1e-15);
    }
    const StateVector b = initial_superposition(bids({"1"}));
    EXPECT_NEAR(b.probability(0), 0.5, 1e-15);
    EXPECT_NEAR(b.probability(1), 0.5, 1e-15);
    const StateVector c = initial_superposition(bids({"01", "01"}));
    EXPECT_EQ(support(c), (std::vector<std::size_t>{0b0000, 0b0001, 0b0100, 0b0101}));
    EXPECT_EQ(plausible_allocations(bids({"01", "01"})), support(c));
}

TEST(Variant, Parse) {
    EXPECT_EQ(parse_variant("first"), Variant::First);
    EXPECT_THROW(parse_variant("second"), ContractViolation);
    EXPECT_EQ(to_string(Variant::Locked), "locked");
}

TEST(Schedule, ValidationAndPresets) {
    AdiabaticSchedule s;
    s.steps = 0;
    EXPECT_THROW(s.validate(), ContractViolation);
    s.steps = 3;
    s.delta = 0.0;
    EXPECT_THROW(s.validate(), ContractViolation);
    s.delta = 1.0;
    s.variant = Variant::Locked;
    EXPECT_THROW(s.validate(), ContractViolation);
    EXPECT_DOUBLE_EQ(AdiabaticSchedule::sqrt_rule(16).delta, 0.25);
    EXPECT_EQ(AdiabaticSchedule::comparison_preset().steps, 40);
    EXPECT_DOUBLE_EQ(AdiabaticSchedule::convergence_preset().delta, 1.5);
    EXPECT_DOUBLE_EQ(s.fraction(3), 1.0);
}

TEST(AdiabaticStep, ZeroDeltaIsIdentityMap) {
    const auto b = bids({"10", "11"});
    const SearchOperators ops(joint_bidding_operator(b), toy_table());
    const StateVector psi = initial_superposition(b);
    for (Variant v : {Variant::Exact, Variant::Zeroth, Variant::First}) {
        AdiabaticSchedule s{10, 1.0, v, std::nullopt};
        s.delta = 1e-300;
        EXPECT_LE(state_error(adiabatic_step(psi, 4, s, ops), psi), 1e-14);
    }
}

TEST(AdiabaticStep, MatchesOracleMatrices) {
    const auto b = bids({"10", "11"});
    const oracle::M u = oracle::kron(oracle::u2(), oracle::u3());
    const SearchOperators ops(joint_bidding_operator(b), toy_table());
    const StateVector psi = initial_superposition(b);
    const auto hp = negated(oracle::toy_first_price());
    for (Variant v : {Variant::Exact, Variant::Zeroth, Variant::First}) {
        for (int s : {1, 17, 40}) {
            const AdiabaticSchedule sched{40, 1.0, v, std::nullopt};
            const oracle::V expect = oracle_step(u, popcounts(4), hp, 1.0, s / 40.0, v) * psi.amplitudes();
            const StateVector got = adiabatic_step(psi, s, sched, ops);
            EXPECT_LE((got.amplitudes() - expect).norm(), 1e-12) << to_string(v) << " s=" << s;
        }
    }
}

TEST(AdiabaticStep, FirstOrderLocalErrorIsCubic) {
    const auto b = bids({"10", "11"});
    const SearchOperators ops(joint_bidding_operator(b), toy_table());
    const StateVector psi = initial_superposition(b);
    std::vector<double> err;
    for (double delta : {0.2, 0.1, 0.05}) {
        const AdiabaticSchedule exact{2, delta, Variant::Exact, std::nullopt};
        const AdiabaticSchedule first{2, delta, Variant::First, std::nullopt};
        err.push_back(phase_invariant_distance(adiabatic_step(psi, 1, exact, ops), adiabatic_step(psi, 1, first, ops)));
    }
    for (std::size_t i = 1; i < err.size(); ++i) {
        const double ratio = err[i - 1] / err[i];
        EXPECT_GT(ratio, 7.0);
        EXPECT_LT(ratio, 9.0);
    }
}

TEST(AdiabaticStep, RejectsMismatchedState) {
    const SearchOperators ops(joint_bidding_operator(bids({"10", "11"})), toy_table());
    EXPECT_THROW(adiabatic_step(StateVector::basis(2, 0), 1, AdiabaticSchedule{}, ops), ContractViolation);
    AdiabaticSchedule locked{};
    locked.variant = Variant::Locked;
    locked.locking = DenseOperator::identity(4);
    EXPECT_THROW(adiabatic_step(initial_superposition(bids({"10", "11"})), 1, locked, ops), ContractViolation);
}

TEST(SearchOperators, Hamiltonians) {
    const auto b = bids({"10", "11"});
    const SearchOperators ops(joint_bidding_operator(b), toy_table());
    const oracle::M u = oracle::kron(oracle::u2(), oracle::u3());
    const oracle::M hb = u * oracle::diag(popcounts(4)) * u.adjoint();
    EXPECT_LE((ops.beginning_hamiltonian().matrix() - hb).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_TRUE(ops.beginning_hamiltonian().is_hermitian());
    const Spectrum s = eig_hermitian(ops.final_hamiltonian());
    EXPECT_NEAR(s.eigenvalues(0), -3.0, 1e-14);
    EXPECT_THROW(SearchOperators(joint_bidding_operator(b), PayoffTable(2, {0, 1, 2, 3})), ContractViolation);
}

TEST(RunAdiabatic, InitialSuccessIsQuarter) {
    for (Variant v : {Variant::Exact, Variant::Zeroth, Variant::First}) {
        const Trajectory t = run_adiabatic(bids({"10", "11"}), toy_table(), AdiabaticSchedule{20, 1.5, v, std::nullopt});
        EXPECT_NEAR(t.steps[0].success_probability, 0.25, 1e-15);
        EXPECT_EQ(t.winner_index, 0b0011u);
        EXPECT_EQ(t.steps.size(), 21u);
    }
}

TEST(RunAdiabatic, ConvergesForToyPairs) {
    for (auto pair : {bids({"10", "11"}), bids({"01", "10"}), bids({"01", "11"})}) {
        const Trajectory t = run_adiabatic(pair, toy_table(), AdiabaticSchedule::convergence_preset());
        EXPECT_GE(t.final_step().success_probability, 0.9);
        EXPECT_LT(t.steps[0].success_probability, t.steps[10].success_probability);
        EXPECT_LT(t.steps[10].success_probability, t.final_step().success_probability);
        EXPECT_LE(t.max_leakage(), 1e-9);
        EXPECT_EQ(t.final_argmax(), t.winner_index);
    }
}

TEST(RunAdiabatic, ExactCrossCheck) {
    const Trajectory z = run_adiabatic(bids({"10", "11"}), toy_table(), AdiabaticSchedule::convergence_preset());
    const Trajectory e =
        run_adiabatic(bids({"10", "11"}), toy_table(), AdiabaticSchedule::convergence_preset(Variant::Exact));
    EXPECT_GE(e.final_step().success_probability, 0.9);
    EXPECT_NEAR(z.final_step().success_probability, e.final_step().success_probability, 0.05);
}

TEST(RunAdiabatic, TiedBidsRaise) {
    EXPECT_THROW(run_adiabatic(bids({"10", "10"}), toy_table(), AdiabaticSchedule{}), TieError);
}

TEST(RunAdiabatic, NormPreservedForAllVariants) {
    for (Variant v : {Variant::Exact, Variant::Zeroth, Variant::First}) {
        const Trajectory t = run_adiabatic(bids({"01", "11"}), toy_table(), AdiabaticSchedule{40, 1.0, v, std::nullopt});
        for (const auto& r : t.steps) EXPECT_NEAR(r.state.norm(), 1.0, 1e-9);
    }
}

TEST(RunAdiabatic, FirstOrderFindsWinnerForEveryDistinctPair) {
    for (std::size_t a = 1; a <= 3; ++a) {
        for (std::size_t b = 1; b <= 3; ++b) {
            if (a == b) continue;
            const std::vector<BidSpec> pair{BidSpec::from_value(a, 2), BidSpec::from_value(b, 2)};
            const Trajectory t = run_adiabatic(pair, toy_table(), AdiabaticSchedule::comparison_preset(Variant::First));
            EXPECT_EQ(t.final_argmax(), t.winner_index) << a << "," << b;
        }
    }
}

TEST(SubspacePreservation, ExhaustiveBasisSweep) {
    std::mt19937_64 rng(41);
    for (auto pair : {bids({"10", "11"}), bids({"01", "11"}), bids({"101", "011"})}) {
        const DenseOperator u = joint_bidding_operator(pair);
        const int n = u.n_qubits();
        const auto plausible = plausible_allocations(pair);
        const auto w = popcounts(n);
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<double> p(w.size());
            for (double& x : p) x = uniform01(rng) * 6.0 - 3.0;
            const double d = uniform01(rng) * 2.0;
            const Matrix step = u.matrix() * evolve_hermitian(DenseOperator::diagonal(w), d).matrix() *
                                u.matrix().adjoint() * evolve_hermitian(DenseOperator::diagonal(p), 1.0).matrix();
            for (std::size_t x : plausible) {
                const StateVector out = DenseOperator(step) * StateVector::basis(n, x);
                double outside = 0.0;
                for (std::size_t y = 0; y < out.dimension(); ++y) {
                    if (!std::binary_search(plausible.begin(), plausible.end(), y)) outside += out.probability(y);
                }
                EXPECT_LE(std::sqrt(outside), 1e-9);
            }
        }
    }
}

TEST(TrotterOrder, SlopesAtFixedTotalTime) {
    const auto b = bids({"10", "11"});
    const SearchOperators ops(joint_bidding_operator(b), toy_table());
    const double total = 8.0;
    std::vector<double> zeroth, first;
    for (double delta : {0.4, 0.2, 0.1}) {
        const int steps = static_cast<int>(std::lround(total / delta));
        const StateVector e = run_search(ops, toy_table(), AdiabaticSchedule{steps, delta, Variant::Exact, std::nullopt})
                                  .final_step()
                                  .state;
        const StateVector z = run_search(ops, toy_table(), AdiabaticSchedule{steps, delta, Variant::Zeroth, std::nullopt})
                                  .final_step()
                                  .state;
        const StateVector f = run_search(ops, toy_table(), AdiabaticSchedule{steps, delta, Variant::First, std::nullopt})
                                  .final_step()
                                  .state;
        zeroth.push_back(state_error(z, e));
        first.push_back(state_error(f, e));
    }
    for (std::size_t i = 1; i < 3; ++i) {
        EXPECT_NEAR(std::log2(zeroth[i - 1] / zeroth[i]), 1.0, 0.3);
        EXPECT_NEAR(std::log2(first[i - 1] / first[i]), 2.0, 0.3);
    }
}

TEST(EigenvalueTracks, RestrictedEndpoints) {
    const EigenTracks t = eigenvalue_tracks(bids({"10", "11"}), toy_table(), AdiabaticSchedule{20, 1.5}, true);
    ASSERT_EQ(t.s.size(), 21u);
    const std::vector<double> start{0, 1, 1, 2};
    const std::vector<double> end{-3, -2, 0, 0};
    for (std::size_t k = 0; k < 4; ++k) {
        EXPECT_NEAR(t.eigenvalues.front()[k], start[k], 1e-12);
        EXPECT_NEAR(t.eigenvalues.back()[k], end[k], 1e-12);
    }
    for (double g : t.gaps) EXPECT_GT(g, 0.0);
    EXPECT_GT(t.g_min, 0.0);
}

TEST(EigenvalueTracks, RestrictedMatchesBruteForceProjection) {
    const auto b = bids({"10", "11"});
    const oracle::M u = oracle::kron(oracle::u2(), oracle::u3());
    const oracle::M hb = u * oracle::diag(popcounts(4)) * u.adjoint();
    const oracle::M hp = oracle::diag(negated(oracle::toy_first_price()));
    const std::vector<int> idx{0, 3, 8, 11};
    const EigenTracks t = eigenvalue_tracks(b, toy_table(), AdiabaticSchedule{10, 1.0}, true);
    for (int s = 0; s <= 10; ++s) {
        const double f = s / 10.0;
        const oracle::M h = (1 - f) * hb + f * hp;
        oracle::M r(4, 4);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) r(i, j) = h(idx[i], idx[j]);
        Eigen::SelfAdjointEigenSolver<oracle::M> es(r);
        for (int k = 0; k < 4; ++k) EXPECT_NEAR(t.eigenvalues[s][k], es.eigenvalues()(k), 1e-12);
    }
}

TEST(EigenvalueTracks, UnrestrictedHasFullDimension) {
    const EigenTracks t = eigenvalue_tracks(bids({"10", "11"}), toy_table(), AdiabaticSchedule{4, 1.0}, false);
    EXPECT_EQ(t.eigenvalues.front().size(), 16u);
}
