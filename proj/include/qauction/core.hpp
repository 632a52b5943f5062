#pragma once

// Dense state-vector and operator primitives.
//
// Basis convention: qubit 0 is the most significant bit of a basis index, so
// for n qubits the state |q0 q1 ... q(n-1)> has index sum_k q_k 2^(n-1-k).

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qauction {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Raised when a caller breaks an operation's precondition (non-Hermitian
/// input to a spectral routine, incomplete POVM, mismatched dimensions, ...).
class ContractViolation : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace tolerance {
inline constexpr double kNormalization = 1e-10;
inline constexpr double kHermitian = 1e-12;
inline constexpr double kUnitaryProduct = 1e-9;
inline constexpr double kChained = 1e-8;
inline constexpr double kPovm = 1e-9;
}  // namespace tolerance

/// Number of qubits n with 2^n == dimension; throws if dimension is not a
/// positive power of two.
int qubits_for_dimension(std::size_t dimension);

/// Bit of qubit `q` in basis index `index` for an `n_qubits` register.
inline int qubit_bit(std::size_t index, int q, int n_qubits) {
    return static_cast<int>((index >> (n_qubits - 1 - q)) & 1U);
}

class StateVector {
public:
    /// Takes ownership of `amplitudes`; rejects non power-of-two lengths and
    /// vectors whose squared norm differs from 1 by more than 1e-10.
    explicit StateVector(Vector amplitudes);

    static StateVector basis(int n_qubits, std::size_t index);
    /// Normalizes before construction. Rejects the zero vector.
    static StateVector normalized(Vector amplitudes);

    const Vector& amplitudes() const { return amplitudes_; }
    int n_qubits() const { return n_qubits_; }
    std::size_t dimension() const { return static_cast<std::size_t>(amplitudes_.size()); }
    Complex amplitude(std::size_t index) const;
    double probability(std::size_t index) const;
    double norm() const { return amplitudes_.norm(); }

    /// Elementwise |amplitude|^2.
    std::vector<double> probabilities() const;

private:
    Vector amplitudes_;
    int n_qubits_ = 0;
};

class DenseOperator {
public:
    explicit DenseOperator(Matrix entries);

    static DenseOperator identity(int n_qubits);
    static DenseOperator diagonal(std::span<const double> values);
    static DenseOperator diagonal(const Vector& values);

    const Matrix& matrix() const { return entries_; }
    int n_qubits() const { return n_qubits_; }
    std::size_t dimension() const { return static_cast<std::size_t>(entries_.rows()); }
    Complex operator()(std::size_t row, std::size_t col) const { return entries_(row, col); }

    DenseOperator adjoint() const;
    bool is_unitary(double tol = tolerance::kNormalization) const;
    bool is_hermitian(double tol = tolerance::kHermitian) const;
    bool is_diagonal(double tol = 0.0) const;

    /// max_ij |A_ij - B_ij|.
    double max_abs_difference(const DenseOperator& other) const;

    DenseOperator operator*(const DenseOperator& rhs) const;
    StateVector operator*(const StateVector& state) const;
    DenseOperator operator+(const DenseOperator& rhs) const;
    DenseOperator operator*(double scale) const;

private:
    Matrix entries_;
    int n_qubits_ = 0;
};

struct Spectrum {
    RealVector eigenvalues;  // ascending
    Matrix eigenvectors;     // column k pairs with eigenvalues[k]
};

DenseOperator tensor_product(const DenseOperator& a, const DenseOperator& b);
StateVector tensor_product(const StateVector& a, const StateVector& b);

/// e^{-iHt} via the spectral decomposition of H. Diagonal H is exponentiated
/// entrywise.
DenseOperator evolve_hermitian(const DenseOperator& h, double t);

Spectrum eig_hermitian(const DenseOperator& h);

/// Checks that every element is Hermitian PSD (min eigenvalue >= -1e-9) and
/// that the elements sum to the identity within 1e-9.
void validate_povm(std::span<const Matrix> elements, std::size_t dimension);

/// Entry j is <psi|Pi_j|psi>.
std::vector<double> measurement_probabilities(const StateVector& state,
                                              std::span<const Matrix> povm);

/// Rank-one projectors onto the computational basis of an n-qubit register.
std::vector<Matrix> computational_basis_povm(int n_qubits);

/// Uniform double in [0, 1) from the top 53 bits of one generator draw.
double uniform01(std::mt19937_64& rng);

/// Draws an outcome index from measurement_probabilities(state, povm).
std::size_t sample_measurement(const StateVector& state, std::span<const Matrix> povm,
                               std::mt19937_64& rng);
/// Same, from precomputed outcome probabilities.
std::size_t sample_index(std::span<const double> probabilities, std::mt19937_64& rng);

/// min over |phi| = 1 of max_ij |U_ij - phi V_ij|.
double phase_invariant_distance(const DenseOperator& u, const DenseOperator& v);
/// Same metric for states.
double phase_invariant_distance(const StateVector& a, const StateVector& b);

/// SplitMix64 finalizer, used to derive independent RNG streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace qauction
