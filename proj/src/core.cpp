#include "qauction/core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>

namespace qauction {

int qubits_for_dimension(std::size_t dimension) {
    if (dimension < 2 || (dimension & (dimension - 1)) != 0) {
        throw ContractViolation("dimension " + std::to_string(dimension) +
                                " is not a positive power of two");
    }
    int n = 0;
    while ((std::size_t{1} << n) < dimension) {
        ++n;
    }
    return n;
}

// ---------------------------------------------------------------- StateVector

StateVector::StateVector(Vector amplitudes)
    : amplitudes_(std::move(amplitudes)),
      n_qubits_(qubits_for_dimension(static_cast<std::size_t>(amplitudes_.size()))) {
    const double norm2 = amplitudes_.squaredNorm();
    if (!(std::abs(norm2 - 1.0) <= tolerance::kNormalization)) {
        throw ContractViolation("state is not normalized: |psi|^2 = " + std::to_string(norm2));
    }
}

StateVector StateVector::basis(int n_qubits, std::size_t index) {
    if (n_qubits < 1 || n_qubits > 30) {
        throw ContractViolation("qubit count out of range");
    }
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (index >= dim) {
        throw std::out_of_range("basis index " + std::to_string(index) + " out of range");
    }
    Vector v = Vector::Zero(static_cast<Eigen::Index>(dim));
    v(static_cast<Eigen::Index>(index)) = 1.0;
    return StateVector(std::move(v));
}

StateVector StateVector::normalized(Vector amplitudes) {
    const double norm = amplitudes.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw ContractViolation("cannot normalize a zero or non-finite vector");
    }
    amplitudes /= norm;
    return StateVector(std::move(amplitudes));
}

Complex StateVector::amplitude(std::size_t index) const {
    if (index >= dimension()) {
        throw std::out_of_range("amplitude index out of range");
    }
    return amplitudes_(static_cast<Eigen::Index>(index));
}

double StateVector::probability(std::size_t index) const {
    return std::norm(amplitude(index));
}

std::vector<double> StateVector::probabilities() const {
    std::vector<double> out(dimension());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::norm(amplitudes_(static_cast<Eigen::Index>(i)));
    }
    return out;
}

// -------------------------------------------------------------- DenseOperator

DenseOperator::DenseOperator(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) {
        throw ContractViolation("operator must be square");
    }
    n_qubits_ = qubits_for_dimension(static_cast<std::size_t>(entries_.rows()));
}

DenseOperator DenseOperator::identity(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 15) {
        throw ContractViolation("qubit count out of range for a dense operator");
    }
    const auto dim = Eigen::Index{1} << n_qubits;
    return DenseOperator(Matrix::Identity(dim, dim));
}

DenseOperator DenseOperator::diagonal(std::span<const double> values) {
    Vector v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = values[i];
    }
    return diagonal(v);
}

DenseOperator DenseOperator::diagonal(const Vector& values) {
    return DenseOperator(Matrix(values.asDiagonal()));
}

DenseOperator DenseOperator::adjoint() const {
    return DenseOperator(entries_.adjoint());
}

bool DenseOperator::is_unitary(double tol) const {
    const auto dim = entries_.rows();
    const Matrix gram = entries_.adjoint() * entries_;
    return (gram - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() <= tol;
}

bool DenseOperator::is_hermitian(double tol) const {
    return (entries_ - entries_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool DenseOperator::is_diagonal(double tol) const {
    for (Eigen::Index c = 0; c < entries_.cols(); ++c) {
        for (Eigen::Index r = 0; r < entries_.rows(); ++r) {
            if (r != c && std::abs(entries_(r, c)) > tol) {
                return false;
            }
        }
    }
    return true;
}

double DenseOperator::max_abs_difference(const DenseOperator& other) const {
    if (dimension() != other.dimension()) {
        throw ContractViolation("dimension mismatch");
    }
    return (entries_ - other.entries_).cwiseAbs().maxCoeff();
}

DenseOperator DenseOperator::operator*(const DenseOperator& rhs) const {
    if (dimension() != rhs.dimension()) {
        throw ContractViolation("dimension mismatch in operator product");
    }
    return DenseOperator(entries_ * rhs.entries_);
}

StateVector DenseOperator::operator*(const StateVector& state) const {
    if (dimension() != state.dimension()) {
        throw ContractViolation("dimension mismatch applying operator to state");
    }
    return StateVector(entries_ * state.amplitudes());
}

DenseOperator DenseOperator::operator+(const DenseOperator& rhs) const {
    if (dimension() != rhs.dimension()) {
        throw ContractViolation("dimension mismatch in operator sum");
    }
    return DenseOperator(entries_ + rhs.entries_);
}

DenseOperator DenseOperator::operator*(double scale) const {
    return DenseOperator(entries_ * scale);
}

// ----------------------------------------------------------------- algebra

DenseOperator tensor_product(const DenseOperator& a, const DenseOperator& b) {
    const Matrix& x = a.matrix();
    const Matrix& y = b.matrix();
    Matrix out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
        }
    }
    return DenseOperator(std::move(out));
}

StateVector tensor_product(const StateVector& a, const StateVector& b) {
    const Vector& x = a.amplitudes();
    const Vector& y = b.amplitudes();
    Vector out(x.size() * y.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        out.segment(i * y.size(), y.size()) = x(i) * y;
    }
    return StateVector(std::move(out));
}

namespace {

void require_hermitian(const DenseOperator& h) {
    const double scale = std::max(1.0, h.matrix().cwiseAbs().maxCoeff());
    if (!h.is_hermitian(tolerance::kHermitian * scale)) {
        throw ContractViolation("operator is not Hermitian");
    }
}

}  // namespace

DenseOperator evolve_hermitian(const DenseOperator& h, double t) {
    require_hermitian(h);
    if (h.is_diagonal()) {
        Vector phases(static_cast<Eigen::Index>(h.dimension()));
        for (Eigen::Index i = 0; i < phases.size(); ++i) {
            phases(i) = std::exp(Complex(0.0, -t * h.matrix()(i, i).real()));
        }
        return DenseOperator::diagonal(phases);
    }
    const Spectrum spec = eig_hermitian(h);
    Vector phases(spec.eigenvalues.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) {
        phases(i) = std::exp(Complex(0.0, -t * spec.eigenvalues(i)));
    }
    return DenseOperator(spec.eigenvectors * phases.asDiagonal() * spec.eigenvectors.adjoint());
}

Spectrum eig_hermitian(const DenseOperator& h) {
    require_hermitian(h);
    const Matrix sym = 0.5 * (h.matrix() + h.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("Hermitian eigensolver did not converge");
    }
    return Spectrum{solver.eigenvalues(), solver.eigenvectors()};
}

// ------------------------------------------------------------- measurement

void validate_povm(std::span<const Matrix> elements, std::size_t dimension) {
    if (elements.empty()) {
        throw ContractViolation("POVM has no elements");
    }
    const auto dim = static_cast<Eigen::Index>(dimension);
    Matrix sum = Matrix::Zero(dim, dim);
    for (const Matrix& e : elements) {
        if (e.rows() != dim || e.cols() != dim) {
            throw ContractViolation("POVM element dimension mismatch");
        }
        if ((e - e.adjoint()).cwiseAbs().maxCoeff() > tolerance::kPovm) {
            throw ContractViolation("POVM element is not Hermitian");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (e + e.adjoint()), Eigen::EigenvaluesOnly);
        if (solver.eigenvalues().minCoeff() < -tolerance::kPovm) {
            throw ContractViolation("POVM element is not positive semidefinite");
        }
        sum += e;
    }
    if ((sum - Matrix::Identity(dim, dim)).cwiseAbs().maxCoeff() > tolerance::kPovm) {
        throw ContractViolation("POVM elements do not sum to the identity");
    }
}

std::vector<double> measurement_probabilities(const StateVector& state,
                                              std::span<const Matrix> povm) {
    validate_povm(povm, state.dimension());
    const Vector& psi = state.amplitudes();
    std::vector<double> out;
    out.reserve(povm.size());
    for (const Matrix& e : povm) {
        out.push_back(psi.dot(e * psi).real());
    }
    return out;
}

std::vector<Matrix> computational_basis_povm(int n_qubits) {
    const auto dim = Eigen::Index{1} << n_qubits;
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(dim));
    for (Eigen::Index i = 0; i < dim; ++i) {
        Matrix p = Matrix::Zero(dim, dim);
        p(i, i) = 1.0;
        out.push_back(std::move(p));
    }
    return out;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t sample_index(std::span<const double> probabilities, std::mt19937_64& rng) {
    if (probabilities.empty()) {
        throw ContractViolation("no outcomes to sample from");
    }
    double total = 0.0;
    for (double p : probabilities) {
        total += std::max(p, 0.0);
    }
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        const double p = std::max(probabilities[i], 0.0);
        if (p > 0.0) {
            last_positive = i;
        }
        acc += p;
        if (u < acc) {
            return i;
        }
    }
    return last_positive;
}

std::size_t sample_measurement(const StateVector& state, std::span<const Matrix> povm,
                               std::mt19937_64& rng) {
    const std::vector<double> probs = measurement_probabilities(state, povm);
    return sample_index(probs, rng);
}

// ----------------------------------------------------- phase-invariant metric

namespace {

// Minimizes max_k |a_k - e^{i alpha} b_k| over alpha by branch and bound on
// the circle. Each squared term is r_k - 2 Re(c_k e^{i alpha}) with
// c_k = conj(a_k) b_k, whose alpha-derivative is bounded by 2|c_k|.
double min_phase_max_distance(std::span<const Complex> a, std::span<const Complex> b) {
    const std::size_t n = a.size();
    double lipschitz = 0.0;
    Complex overlap{0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        lipschitz = std::max(lipschitz, std::abs(b[k]));
        overlap += std::conj(b[k]) * a[k];
    }
    // g(alpha) = max_k |a_k - e^{i alpha} b_k|, Lipschitz in alpha with constant max_k |b_k|.
    auto objective = [&](double alpha) {
        const Complex phase = std::polar(1.0, alpha);
        double worst = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            worst = std::max(worst, std::abs(a[k] - phase * b[k]));
        }
        return worst;
    };

    // The Frobenius-optimal phase aligns sum_k conj(b_k) a_k with the real axis.
    double best = objective(std::abs(overlap) > 0.0 ? std::arg(overlap) : 0.0);
    if (lipschitz == 0.0 || best == 0.0) {
        return best;
    }

    struct Interval {
        double lower_bound;
        double mid;
        double half_width;
        bool operator>(const Interval& o) const { return lower_bound > o.lower_bound; }
    };
    std::priority_queue<Interval, std::vector<Interval>, std::greater<>> queue;
    constexpr int kInitial = 64;
    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    const double half = kTwoPi / kInitial / 2.0;
    for (int i = 0; i < kInitial; ++i) {
        const double mid = (2 * i + 1) * half;
        const double value = objective(mid);
        best = std::min(best, value);
        queue.push({value - lipschitz * half, mid, half});
    }
    constexpr double kResolution = 1e-16;
    constexpr int kMaxEvaluations = 200000;
    int evaluations = kInitial;
    while (!queue.empty() && evaluations < kMaxEvaluations) {
        const Interval top = queue.top();
        queue.pop();
        if (top.lower_bound >= best - kResolution) {
            break;
        }
        const double h = top.half_width / 2.0;
        for (double mid : {top.mid - h, top.mid + h}) {
            const double value = objective(mid);
            ++evaluations;
            best = std::min(best, value);
            queue.push({value - lipschitz * h, mid, h});
        }
    }
    return best;
}

}  // namespace

double phase_invariant_distance(const DenseOperator& u, const DenseOperator& v) {
    if (u.dimension() != v.dimension()) {
        throw ContractViolation("dimension mismatch in phase_invariant_distance");
    }
    const Matrix& a = u.matrix();
    const Matrix& b = v.matrix();
    return min_phase_max_distance(std::span<const Complex>(a.data(), static_cast<std::size_t>(a.size())),
                                  std::span<const Complex>(b.data(), static_cast<std::size_t>(b.size())));
}

double phase_invariant_distance(const StateVector& a, const StateVector& b) {
    if (a.dimension() != b.dimension()) {
        throw ContractViolation("dimension mismatch in phase_invariant_distance");
    }
    return min_phase_max_distance(
        std::span<const Complex>(a.amplitudes().data(), a.dimension()),
        std::span<const Complex>(b.amplitudes().data(), b.dimension()));
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace qauction
