#pragma once

// Gate-level circuits and their dense matrix extraction.

#include "qauction/core.hpp"
#include "qauction/protocol.hpp"

#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace qauction {

struct Gate;

namespace gates {
struct Hadamard {
    int q = 0;
};
struct Cnot {
    int control = 0;
    int target = 1;
};
/// diag(1, e^{-i theta}).
struct Phase {
    int q = 0;
    double theta = 0.0;
};
/// [[cos, sin], [sin, -cos]].
struct Rotation {
    int q = 0;
    double theta = 0.0;
};
/// Applies `body` on the subspace where every control qubit is |0>. Body gates
/// use global qubit indices and must not touch the controls.
struct ZeroControlled {
    std::vector<int> controls;
    std::vector<Gate> body;
};
}  // namespace gates

struct Gate {
    std::variant<gates::Hadamard, gates::Cnot, gates::Phase, gates::Rotation, gates::ZeroControlled> op;
};

/// Qubits a gate acts on (controls included), in no particular order.
std::vector<int> gate_qubits(const Gate& g);

class Circuit {
public:
    explicit Circuit(int n_qubits);

    int n_qubits() const { return n_qubits_; }
    const std::vector<Gate>& gates() const { return gates_; }
    std::size_t size() const { return gates_.size(); }

    /// Validates indices against the width; throws ContractViolation.
    Circuit& add(Gate g);
    Circuit& h(int q);
    Circuit& cnot(int control, int target);
    Circuit& phase(int q, double theta);
    Circuit& rot(int q, double theta);
    Circuit& zero_controlled(std::vector<int> controls, const Circuit& body);
    Circuit& append(const Circuit& other);

    /// Gate-reversed circuit with each gate inverted.
    Circuit inverse() const;

private:
    int n_qubits_;
    std::vector<Gate> gates_;
};

/// Product of gate embeddings, first gate applied first.
DenseOperator circuit_to_matrix(const Circuit& c);

/// Applies the circuit to a state without forming the matrix.
StateVector apply_circuit(const Circuit& c, const StateVector& state);

/// Text form: one gate per line (`H q0`, `CNOT q0 q1`, `PHASE q0 0.125`,
/// `ROT q0 0.3`, `CTRL0 [q0 q1] { ... }`), `#` starts a comment.
std::string circuit_to_text(const Circuit& c);

class CircuitParseError : public std::runtime_error {
public:
    CircuitParseError(int line, const std::string& what);
    int line() const { return line_; }

private:
    int line_;
};

Circuit parse_circuit(std::string_view text, int n_qubits);

/// H on the lowest set qubit, CNOT fan-out to the others. `offset` shifts all
/// qubit indices; `width` defaults to offset + bid width.
Circuit build_bidder_circuit(const BidSpec& bid, int offset = 0, int width = -1);
/// Bidder circuits placed on consecutive registers.
Circuit build_joint_bidder_circuit(std::span<const BidSpec> bids);

/// PHASE(q, f*delta) on every qubit: e^{-i delta f W}.
Circuit build_D_circuit(double delta, double f, int n_qubits);

/// e^{i theta Z_T} up to global phase.
Circuit build_zz_exponential(std::span<const int> qubits, double theta, int n_qubits);

/// Product of build_zz_exponential(T, -f delta c_T) over non-constant terms:
/// e^{-i delta f H_p} up to global phase.
Circuit build_P_circuit(std::span<const PauliZTerm> expansion, double delta, double f, int n_qubits);

/// Joint bidding circuit that removes the revealing state: bidder 1 is rotated
/// to keep.first |00> + keep.second |b1>, then bidder 2's circuit runs only
/// when bidder 1's register is |0...0>.
Circuit build_collusion_circuit(const BidSpec& bid1, const BidSpec& bid2,
                                std::pair<double, double> keep = {std::sqrt(2.0 / 3.0), std::sqrt(1.0 / 3.0)});

struct VerifyReport {
    double distance = 0.0;
    bool pass = false;
};

/// pass iff phase_invariant_distance(circuit_to_matrix(c), target) <= 1e-8.
VerifyReport verify_circuit(const Circuit& c, const DenseOperator& target);

}  // namespace qauction
