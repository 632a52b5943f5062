#include "qauction/core.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <numbers>

using namespace qauction;

namespace {

Matrix pauli_z() {
    Matrix z(2, 2);
    z << 1, 0, 0, -1;
    return z;
}

Matrix random_hermitian(int dim, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Matrix a(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) a(i, j) = Complex(g(rng), g(rng));
    return 0.5 * (a + a.adjoint());
}

Matrix random_unitary(int dim, std::mt19937_64& rng) {
    return oracle::evolve(random_hermitian(dim, rng), 1.0);
}

}  // namespace

TEST(StateVector, RejectsBadNormAndLength) {
    EXPECT_THROW(StateVector(Vector::Zero(4)), ContractViolation);
    Vector three = Vector::Zero(3);
    three(0) = 1.0;
    EXPECT_THROW(StateVector{three}, ContractViolation);
    Vector almost = Vector::Zero(2);
    almost(0) = 1.0 + 1e-9;
    EXPECT_THROW(StateVector{almost}, ContractViolation);
    almost(0) = 1.0 + 1e-12;
    EXPECT_NO_THROW(StateVector{almost});
}

TEST(StateVector, BasisAndNormalized) {
    const StateVector b = StateVector::basis(3, 5);
    EXPECT_EQ(b.n_qubits(), 3);
    EXPECT_DOUBLE_EQ(b.probability(5), 1.0);
    Vector v(2);
    v << 3.0, 4.0;
    const StateVector n = StateVector::normalized(v);
    EXPECT_NEAR(n.probability(0), 9.0 / 25.0, 1e-15);
    EXPECT_THROW(StateVector::basis(2, 4), std::out_of_range);
}

TEST(QubitOrder, QubitZeroIsMostSignificant) {
    EXPECT_EQ(qubit_bit(0b1000, 0, 4), 1);
    EXPECT_EQ(qubit_bit(0b1000, 3, 4), 0);
    EXPECT_EQ(qubit_bit(0b0001, 3, 4), 1);
}

TEST(DenseOperator, RejectsNonSquareOrNonPowerOfTwo) {
    EXPECT_THROW(DenseOperator(Matrix::Zero(2, 3)), ContractViolation);
    EXPECT_THROW(DenseOperator(Matrix::Zero(3, 3)), ContractViolation);
}

TEST(DenseOperator, Predicates) {
    EXPECT_TRUE(DenseOperator::identity(2).is_unitary());
    EXPECT_TRUE(DenseOperator(pauli_z()).is_hermitian());
    Matrix n(2, 2);
    n << 0, 1, 0, 0;
    EXPECT_FALSE(DenseOperator(n).is_unitary());
    EXPECT_FALSE(DenseOperator(n).is_hermitian());
    EXPECT_TRUE(DenseOperator(pauli_z()).is_diagonal());
}

TEST(TensorProduct, IdentityCase) {
    const DenseOperator i4 = tensor_product(DenseOperator::identity(1), DenseOperator::identity(1));
    EXPECT_EQ(i4.max_abs_difference(DenseOperator::identity(2)), 0.0);
}

TEST(TensorProduct, PhaseGateProduct) {
    const double d = 0.37;
    Matrix p(2, 2);
    p << 1, 0, 0, std::exp(Complex(0, -d));
    const DenseOperator pp = tensor_product(DenseOperator(p), DenseOperator(p));
    const Complex e1 = std::exp(Complex(0, -d));
    const Complex e2 = std::exp(Complex(0, -2 * d));
    Vector expect(4);
    expect << 1.0, e1, e1, e2;
    EXPECT_LT((pp.matrix() - Matrix(expect.asDiagonal())).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(TensorProduct, PauliZZ) {
    const DenseOperator zz = tensor_product(DenseOperator(pauli_z()), DenseOperator(pauli_z()));
    Vector expect(4);
    expect << 1, -1, -1, 1;
    EXPECT_EQ((zz.matrix() - Matrix(expect.asDiagonal())).cwiseAbs().maxCoeff(), 0.0);
}

TEST(TensorProduct, MatchesNaiveKron) {
    std::mt19937_64 rng(3);
    const Matrix a = random_unitary(2, rng);
    const Matrix b = random_unitary(4, rng);
    const DenseOperator k = tensor_product(DenseOperator(a), DenseOperator(b));
    EXPECT_LT((k.matrix() - oracle::kron(a, b)).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_TRUE(k.is_unitary());
}

TEST(EvolveHermitian, ZeroTimeIsIdentity) {
    std::mt19937_64 rng(1);
    const DenseOperator h(random_hermitian(4, rng));
    EXPECT_LT(evolve_hermitian(h, 0.0).max_abs_difference(DenseOperator::identity(2)), 1e-12);
}

TEST(EvolveHermitian, HammingDiagonal) {
    std::vector<double> w(16);
    for (std::size_t x = 0; x < 16; ++x) w[x] = std::popcount(x);
    const double t = 1.5 * 0.3;
    const DenseOperator u = evolve_hermitian(DenseOperator::diagonal(w), t);
    for (std::size_t x = 0; x < 16; ++x) {
        EXPECT_LT(std::abs(u(x, x) - std::exp(Complex(0, -t * w[x]))), 1e-15);
    }
}

TEST(EvolveHermitian, PauliZAtPi) {
    const DenseOperator u = evolve_hermitian(DenseOperator(pauli_z()), std::numbers::pi);
    EXPECT_LT(std::abs(u(0, 0) - std::exp(Complex(0, -std::numbers::pi))), 1e-15);
    EXPECT_LT(std::abs(u(1, 1) - std::exp(Complex(0, std::numbers::pi))), 1e-15);
}

TEST(EvolveHermitian, MatchesTaylorOracle) {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix h = random_hermitian(8, rng);
        const DenseOperator u = evolve_hermitian(DenseOperator(h), 0.8);
        EXPECT_LT((u.matrix() - oracle::evolve(h, 0.8)).cwiseAbs().maxCoeff(), 1e-11);
        EXPECT_TRUE(u.is_unitary(tolerance::kUnitaryProduct));
    }
}

TEST(EvolveHermitian, RejectsNonHermitian) {
    Matrix n(2, 2);
    n << 0, 1, 0, 0;
    EXPECT_THROW(evolve_hermitian(DenseOperator(n), 1.0), ContractViolation);
}

TEST(EvolveHermitian, GroupProperty) {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const DenseOperator h(random_hermitian(8, rng));
        const double s = uniform01(rng) * 3.0 - 1.5;
        const double t = uniform01(rng) * 3.0 - 1.5;
        const DenseOperator lhs = evolve_hermitian(h, s) * evolve_hermitian(h, t);
        EXPECT_LE(phase_invariant_distance(lhs, evolve_hermitian(h, s + t)), tolerance::kChained);
    }
}

TEST(EvolveHermitian, PreservesNorm) {
    std::mt19937_64 rng(5);
    const DenseOperator h(random_hermitian(16, rng));
    Vector v(16);
    for (int i = 0; i < 16; ++i) v(i) = Complex(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
    StateVector psi = StateVector::normalized(v);
    for (int step = 0; step < 40; ++step) {
        psi = evolve_hermitian(h, 0.7) * psi;
    }
    EXPECT_NEAR(psi.norm(), 1.0, tolerance::kNormalization);
}

TEST(EigHermitian, DiagonalSorted) {
    Matrix m = Matrix::Zero(4, 4);
    m(0, 0) = 3;
    m(1, 1) = 1;
    m(2, 2) = 2;
    m(3, 3) = 5;
    const Spectrum s = eig_hermitian(DenseOperator(m));
    EXPECT_NEAR(s.eigenvalues(0), 1, 1e-14);
    EXPECT_NEAR(s.eigenvalues(1), 2, 1e-14);
    EXPECT_NEAR(s.eigenvalues(2), 3, 1e-14);
    EXPECT_NEAR(s.eigenvalues(3), 5, 1e-14);
}

TEST(EigHermitian, ReconstructionAndOrthonormality) {
    std::mt19937_64 rng(13);
    const Matrix h = random_hermitian(16, rng);
    const Spectrum s = eig_hermitian(DenseOperator(h));
    const Matrix& q = s.eigenvectors;
    const Matrix rebuilt = q * s.eigenvalues.cast<Complex>().asDiagonal() * q.adjoint();
    EXPECT_LE((rebuilt - h).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((q.adjoint() * q - Matrix::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-12);
    for (int i = 1; i < 16; ++i) EXPECT_LE(s.eigenvalues(i - 1), s.eigenvalues(i));
}

TEST(EigHermitian, InvariantUnderConjugation) {
    std::mt19937_64 rng(17);
    const Matrix h = random_hermitian(8, rng);
    const Matrix u = random_unitary(8, rng);
    const Spectrum a = eig_hermitian(DenseOperator(h));
    const Spectrum b = eig_hermitian(DenseOperator(Matrix(u * h * u.adjoint())));
    EXPECT_LE((a.eigenvalues - b.eigenvalues).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(EigHermitian, RejectsNonHermitian) {
    Matrix n(2, 2);
    n << 1, 2, 0, 1;
    EXPECT_THROW(eig_hermitian(DenseOperator(n)), ContractViolation);
}

TEST(Measurement, BasisState) {
    const auto povm = computational_basis_povm(2);
    const auto p = measurement_probabilities(StateVector::basis(2, 0), povm);
    ASSERT_EQ(p.size(), 4u);
    EXPECT_DOUBLE_EQ(p[0], 1.0);
    EXPECT_DOUBLE_EQ(p[1] + p[2] + p[3], 0.0);
}

TEST(Measurement, EqualSuperposition) {
    Vector v = Vector::Zero(4);
    v(0) = v(2) = 1.0 / std::sqrt(2.0);
    const auto p = measurement_probabilities(StateVector(v), computational_basis_povm(2));
    EXPECT_NEAR(p[0], 0.5, 1e-15);
    EXPECT_NEAR(p[1], 0.0, 1e-15);
    EXPECT_NEAR(p[2], 0.5, 1e-15);
    EXPECT_NEAR(p[3], 0.0, 1e-15);
}

TEST(Measurement, TrivialPovm) {
    const std::vector<Matrix> trivial{Matrix::Identity(4, 4)};
    Vector v = Vector::Constant(4, 0.5);
    const auto p = measurement_probabilities(StateVector(v), trivial);
    ASSERT_EQ(p.size(), 1u);
    EXPECT_NEAR(p[0], 1.0, 1e-15);
}

TEST(Measurement, MatchesAmplitudesSquared) {
    std::mt19937_64 rng(19);
    Vector v(8);
    for (int i = 0; i < 8; ++i) v(i) = Complex(uniform01(rng) - 0.5, uniform01(rng) - 0.5);
    const StateVector psi = StateVector::normalized(v);
    const auto p = measurement_probabilities(psi, computational_basis_povm(3));
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(p[i], std::norm(psi.amplitude(i)), 1e-15);
}

TEST(Measurement, RejectsIncompletePovm) {
    const std::vector<Matrix> partial{0.5 * Matrix::Identity(2, 2)};
    EXPECT_THROW(measurement_probabilities(StateVector::basis(1, 0), partial), ContractViolation);
    Matrix neg = Matrix::Identity(2, 2);
    neg(0, 0) = -0.1;
    Matrix rest = Matrix::Identity(2, 2) - neg;
    const std::vector<Matrix> not_psd{neg, rest};
    EXPECT_THROW(validate_povm(not_psd, 2), ContractViolation);
}

TEST(Sampling, DeterministicOutcomes) {
    std::mt19937_64 rng(0);
    const auto basis = computational_basis_povm(2);
    const std::vector<Matrix> trivial{Matrix::Identity(4, 4)};
    Vector v = Vector::Constant(4, 0.5);
    for (int i = 0; i < 100; ++i) {
        EXPECT_EQ(sample_measurement(StateVector::basis(2, 0), basis, rng), 0u);
        EXPECT_EQ(sample_measurement(StateVector(v), trivial, rng), 0u);
    }
}

TEST(Sampling, BinomialFrequency) {
    Vector v = Vector::Zero(4);
    v(0) = v(2) = 1.0 / std::sqrt(2.0);
    const StateVector psi(v);
    const auto basis = computational_basis_povm(2);
    std::mt19937_64 rng(2024);
    const int n = 100000;
    int hits = 0;
    for (int i = 0; i < n; ++i) hits += sample_measurement(psi, basis, rng) == 2 ? 1 : 0;
    const double sigma = std::sqrt(0.25 / n);
    EXPECT_LE(std::abs(static_cast<double>(hits) / n - 0.5), 3.0 * sigma);
}

TEST(Sampling, ReproducibleForSeed) {
    Vector v = Vector::Constant(4, 0.5);
    const StateVector psi(v);
    const auto basis = computational_basis_povm(2);
    std::mt19937_64 a(99), b(99);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_measurement(psi, basis, a), sample_measurement(psi, basis, b));
}

TEST(PhaseInvariantDistance, SelfAndGlobalPhase) {
    std::mt19937_64 rng(23);
    const DenseOperator u(random_unitary(8, rng));
    EXPECT_EQ(phase_invariant_distance(u, u), 0.0);
    const DenseOperator v(Matrix(std::exp(Complex(0, std::numbers::pi / 3)) * u.matrix()));
    EXPECT_LE(phase_invariant_distance(u, v), 1e-15);
}

TEST(PhaseInvariantDistance, IdentityVersusZ) {
    // |1 - phi| and |1 + phi| cannot both be below sqrt2 for |phi| = 1.
    const double d = phase_invariant_distance(DenseOperator::identity(1), DenseOperator(pauli_z()));
    EXPECT_NEAR(d, std::sqrt(2.0), 1e-12);
    EXPECT_GE(d, 1.0);
}

TEST(PhaseInvariantDistance, MatchesGridSearch) {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 5; ++trial) {
        const Matrix a = random_unitary(4, rng);
        const Matrix b = random_unitary(4, rng);
        double grid = 1e300;
        for (int k = 0; k < 200000; ++k) {
            const Complex phi = std::polar(1.0, 2.0 * std::numbers::pi * k / 200000.0);
            grid = std::min(grid, (a - phi * b).cwiseAbs().maxCoeff());
        }
        const double d = phase_invariant_distance(DenseOperator(a), DenseOperator(b));
        EXPECT_LE(d, grid + 1e-12);
        EXPECT_GE(d, grid - 1e-4);
    }
}

TEST(PhaseInvariantDistance, ResolvesSmallPerturbations) {
    std::mt19937_64 rng(31);
    const Matrix a = random_unitary(4, rng);
    Matrix b = std::exp(Complex(0, 1.0)) * a;
    b(1, 2) += 1e-10;
    const double d = phase_invariant_distance(DenseOperator(a), DenseOperator(b));
    EXPECT_GT(d, 1e-12);
    EXPECT_LE(d, 1e-10 + 1e-15);
}

TEST(PhaseInvariantDistance, States) {
    const StateVector a = StateVector::basis(2, 1);
    Vector v = Vector::Zero(4);
    v(1) = Complex(0, 1);
    EXPECT_LE(phase_invariant_distance(a, StateVector(v)), 1e-15);
    EXPECT_THROW(phase_invariant_distance(a, StateVector::basis(1, 0)), ContractViolation);
}

TEST(DeriveSeed, DistinctStreams) {
    EXPECT_NE(derive_seed(0, 0), derive_seed(0, 1));
    EXPECT_NE(derive_seed(0, 0), derive_seed(1, 0));
    EXPECT_EQ(derive_seed(42, 7), derive_seed(42, 7));
}
