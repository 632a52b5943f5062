#include "qauction/circuits.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

namespace qauction {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void collect_qubits(const Gate& g, std::vector<int>& out) {
    std::visit(overloaded{
                   [&](const gates::Hadamard& h) { out.push_back(h.q); },
                   [&](const gates::Cnot& c) {
                       out.push_back(c.control);
                       out.push_back(c.target);
                   },
                   [&](const gates::Phase& p) { out.push_back(p.q); },
                   [&](const gates::Rotation& r) { out.push_back(r.q); },
                   [&](const gates::ZeroControlled& z) {
                       out.insert(out.end(), z.controls.begin(), z.controls.end());
                       for (const Gate& inner : z.body) {
                           collect_qubits(inner, out);
                       }
                   },
               },
               g.op);
}

void validate_gate(const Gate& g, int n_qubits) {
    auto in_range = [&](int q) {
        if (q < 0 || q >= n_qubits) {
            throw ContractViolation("qubit index " + std::to_string(q) + " outside circuit width " +
                                    std::to_string(n_qubits));
        }
    };
    std::visit(overloaded{
                   [&](const gates::Hadamard& h) { in_range(h.q); },
                   [&](const gates::Cnot& c) {
                       in_range(c.control);
                       in_range(c.target);
                       if (c.control == c.target) {
                           throw ContractViolation("CNOT control and target coincide");
                       }
                   },
                   [&](const gates::Phase& p) {
                       in_range(p.q);
                       if (!std::isfinite(p.theta)) throw ContractViolation("non-finite phase angle");
                   },
                   [&](const gates::Rotation& r) {
                       in_range(r.q);
                       if (!std::isfinite(r.theta)) throw ContractViolation("non-finite rotation angle");
                   },
                   [&](const gates::ZeroControlled& z) {
                       std::vector<int> controls = z.controls;
                       std::sort(controls.begin(), controls.end());
                       if (std::adjacent_find(controls.begin(), controls.end()) != controls.end()) {
                           throw ContractViolation("repeated control qubit");
                       }
                       for (int q : controls) in_range(q);
                       for (const Gate& inner : z.body) {
                           validate_gate(inner, n_qubits);
                           std::vector<int> touched;
                           collect_qubits(inner, touched);
                           for (int q : touched) {
                               if (std::binary_search(controls.begin(), controls.end(), q)) {
                                   throw ContractViolation("controlled body acts on control qubit " +
                                                           std::to_string(q));
                               }
                           }
                       }
                   },
               },
               g.op);
}

Gate inverse_gate(const Gate& g) {
    return std::visit(overloaded{
                          [](const gates::Phase& p) { return Gate{gates::Phase{p.q, -p.theta}}; },
                          [](const gates::ZeroControlled& z) {
                              gates::ZeroControlled inv{z.controls, {}};
                              for (auto it = z.body.rbegin(); it != z.body.rend(); ++it) {
                                  inv.body.push_back(inverse_gate(*it));
                              }
                              return Gate{std::move(inv)};
                          },
                          // H, CNOT and ROT are involutions.
                          [&](const auto&) { return g; },
                      },
                      g.op);
}

std::size_t mask_of(int q, int n) { return std::size_t{1} << (n - 1 - q); }

// In-place application on every column of `m` (rows index the basis).
void apply_gate(const Gate& g, Matrix& m, int n) {
    const auto dim = static_cast<std::size_t>(m.rows());
    std::visit(
        overloaded{
            [&](const gates::Hadamard& h) {
                const std::size_t bit = mask_of(h.q, n);
                const double r = 1.0 / std::numbers::sqrt2;
                for (std::size_t x = 0; x < dim; ++x) {
                    if (x & bit) continue;
                    const auto i0 = static_cast<Eigen::Index>(x);
                    const auto i1 = static_cast<Eigen::Index>(x | bit);
                    const auto a = m.row(i0).eval();
                    const auto b = m.row(i1).eval();
                    m.row(i0) = r * (a + b);
                    m.row(i1) = r * (a - b);
                }
            },
            [&](const gates::Cnot& c) {
                const std::size_t cb = mask_of(c.control, n);
                const std::size_t tb = mask_of(c.target, n);
                for (std::size_t x = 0; x < dim; ++x) {
                    if ((x & cb) && !(x & tb)) {
                        m.row(static_cast<Eigen::Index>(x)).swap(m.row(static_cast<Eigen::Index>(x | tb)));
                    }
                }
            },
            [&](const gates::Phase& p) {
                const std::size_t bit = mask_of(p.q, n);
                const Complex ph = std::exp(Complex(0.0, -p.theta));
                for (std::size_t x = 0; x < dim; ++x) {
                    if (x & bit) m.row(static_cast<Eigen::Index>(x)) *= ph;
                }
            },
            [&](const gates::Rotation& r) {
                const std::size_t bit = mask_of(r.q, n);
                const double c = std::cos(r.theta);
                const double s = std::sin(r.theta);
                for (std::size_t x = 0; x < dim; ++x) {
                    if (x & bit) continue;
                    const auto i0 = static_cast<Eigen::Index>(x);
                    const auto i1 = static_cast<Eigen::Index>(x | bit);
                    const auto a = m.row(i0).eval();
                    const auto b = m.row(i1).eval();
                    m.row(i0) = c * a + s * b;
                    m.row(i1) = s * a - c * b;
                }
            },
            [&](const gates::ZeroControlled& z) {
                std::size_t cmask = 0;
                for (int q : z.controls) cmask |= mask_of(q, n);
                Matrix inner = m;
                for (const Gate& g2 : z.body) apply_gate(g2, inner, n);
                for (std::size_t x = 0; x < dim; ++x) {
                    if ((x & cmask) == 0) m.row(static_cast<Eigen::Index>(x)) = inner.row(static_cast<Eigen::Index>(x));
                }
            },
        },
        g.op);
}

std::string format_angle(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_gates(std::ostringstream& out, const std::vector<Gate>& list, int indent) {
    const std::string pad(static_cast<std::size_t>(indent), ' ');
    for (const Gate& g : list) {
        std::visit(overloaded{
                       [&](const gates::Hadamard& h) { out << pad << "H q" << h.q << '\n'; },
                       [&](const gates::Cnot& c) { out << pad << "CNOT q" << c.control << " q" << c.target << '\n'; },
                       [&](const gates::Phase& p) { out << pad << "PHASE q" << p.q << ' ' << format_angle(p.theta) << '\n'; },
                       [&](const gates::Rotation& r) { out << pad << "ROT q" << r.q << ' ' << format_angle(r.theta) << '\n'; },
                       [&](const gates::ZeroControlled& z) {
                           out << pad << "CTRL0 [";
                           for (std::size_t i = 0; i < z.controls.size(); ++i) {
                               out << (i ? " q" : "q") << z.controls[i];
                           }
                           out << "] {\n";
                           write_gates(out, z.body, indent + 2);
                           out << pad << "}\n";
                       },
                   },
                   g.op);
    }
}

// ------------------------------------------------------------------ parser

struct Token {
    std::string text;
    int line;
};

std::vector<Token> tokenize(std::string_view text) {
    std::vector<Token> out;
    int line = 1;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (c == '\n') {
            out.push_back({"\n", line});
            ++line;
            ++i;
        } else if (c == ';') {
            out.push_back({"\n", line});
            ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else if (c == '[' || c == ']' || c == '{' || c == '}') {
            out.push_back({std::string(1, c), line});
            ++i;
        } else {
            std::size_t j = i;
            while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) &&
                   std::string_view("#;[]{}").find(text[j]) == std::string_view::npos) {
                ++j;
            }
            out.push_back({std::string(text.substr(i, j - i)), line});
            i = j;
        }
    }
    return out;
}

class Parser {
public:
    Parser(std::vector<Token> tokens, int n_qubits) : tokens_(std::move(tokens)), n_(n_qubits) {}

    std::vector<Gate> parse_block(bool nested) {
        std::vector<Gate> out;
        while (true) {
            skip_separators();
            if (at_end()) {
                if (nested) fail("unterminated CTRL0 block");
                return out;
            }
            if (peek().text == "}") {
                if (!nested) fail("unexpected '}'");
                ++pos_;
                return out;
            }
            out.push_back(parse_statement());
            if (!at_end() && peek().text != "\n" && peek().text != "}") {
                fail("unexpected token '" + peek().text + "'");
            }
        }
    }

private:
    bool at_end() const { return pos_ >= tokens_.size(); }
    const Token& peek() const { return tokens_[pos_]; }
    int line() const { return at_end() ? (tokens_.empty() ? 1 : tokens_.back().line) : peek().line; }
    [[noreturn]] void fail(const std::string& msg) const { throw CircuitParseError(line(), msg); }

    void skip_separators() {
        while (!at_end() && peek().text == "\n") ++pos_;
    }

    const Token& next(const char* what) {
        if (at_end() || peek().text == "\n") fail(std::string("expected ") + what);
        return tokens_[pos_++];
    }

    void expect(const char* literal) {
        if (at_end() || peek().text != literal) fail(std::string("expected '") + literal + "'");
        ++pos_;
    }

    int qubit() {
        const Token& t = next("qubit");
        if (t.text.size() < 2 || t.text[0] != 'q') fail("bad qubit token '" + t.text + "'");
        int value = 0;
        for (std::size_t i = 1; i < t.text.size(); ++i) {
            if (!std::isdigit(static_cast<unsigned char>(t.text[i])) || value > 1000) {
                fail("bad qubit token '" + t.text + "'");
            }
            value = value * 10 + (t.text[i] - '0');
        }
        if (value >= n_) fail("qubit q" + std::to_string(value) + " outside circuit width " + std::to_string(n_));
        return value;
    }

    double angle() {
        const Token& t = next("angle");
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t.text, &used);
        } catch (const std::exception&) {
            fail("bad angle '" + t.text + "'");
        }
        if (used != t.text.size() || !std::isfinite(v)) fail("bad angle '" + t.text + "'");
        return v;
    }

    Gate parse_statement() {
        const Token& head = tokens_[pos_++];
        const std::string& op = head.text;
        if (op == "H") return Gate{gates::Hadamard{qubit()}};
        if (op == "CNOT") {
            const int c = qubit();
            const int t = qubit();
            return Gate{gates::Cnot{c, t}};
        }
        if (op == "PHASE") {
            const int q = qubit();
            return Gate{gates::Phase{q, angle()}};
        }
        if (op == "ROT") {
            const int q = qubit();
            return Gate{gates::Rotation{q, angle()}};
        }
        if (op == "CTRL0") {
            expect("[");
            gates::ZeroControlled z;
            while (!at_end() && peek().text != "]") {
                z.controls.push_back(qubit());
            }
            expect("]");
            if (z.controls.empty()) fail("CTRL0 needs at least one control");
            skip_separators();
            expect("{");
            z.body = parse_block(true);
            return Gate{std::move(z)};
        }
        --pos_;
        fail("unknown gate '" + op + "'");
    }

    std::vector<Token> tokens_;
    std::size_t pos_ = 0;
    int n_;
};

}  // namespace

std::vector<int> gate_qubits(const Gate& g) {
    std::vector<int> out;
    collect_qubits(g, out);
    return out;
}

// ------------------------------------------------------------------ Circuit

Circuit::Circuit(int n_qubits) : n_qubits_(n_qubits) {
    if (n_qubits < 1 || n_qubits > 24) {
        throw ContractViolation("circuit width must be between 1 and 24");
    }
}

Circuit& Circuit::add(Gate g) {
    validate_gate(g, n_qubits_);
    gates_.push_back(std::move(g));
    return *this;
}

Circuit& Circuit::h(int q) { return add(Gate{gates::Hadamard{q}}); }
Circuit& Circuit::cnot(int control, int target) { return add(Gate{gates::Cnot{control, target}}); }
Circuit& Circuit::phase(int q, double theta) { return add(Gate{gates::Phase{q, theta}}); }
Circuit& Circuit::rot(int q, double theta) { return add(Gate{gates::Rotation{q, theta}}); }

Circuit& Circuit::zero_controlled(std::vector<int> controls, const Circuit& body) {
    if (body.n_qubits() != n_qubits_) {
        throw ContractViolation("controlled body width differs from circuit width");
    }
    if (controls.empty()) {
        return append(body);
    }
    return add(Gate{gates::ZeroControlled{std::move(controls), body.gates()}});
}

Circuit& Circuit::append(const Circuit& other) {
    if (other.n_qubits() != n_qubits_) {
        throw ContractViolation("appended circuit width differs");
    }
    gates_.insert(gates_.end(), other.gates_.begin(), other.gates_.end());
    return *this;
}

Circuit Circuit::inverse() const {
    Circuit out(n_qubits_);
    for (auto it = gates_.rbegin(); it != gates_.rend(); ++it) {
        out.gates_.push_back(inverse_gate(*it));
    }
    return out;
}

DenseOperator circuit_to_matrix(const Circuit& c) {
    const auto dim = static_cast<Eigen::Index>(std::size_t{1} << c.n_qubits());
    Matrix m = Matrix::Identity(dim, dim);
    for (const Gate& g : c.gates()) {
        apply_gate(g, m, c.n_qubits());
    }
    return DenseOperator(std::move(m));
}

StateVector apply_circuit(const Circuit& c, const StateVector& state) {
    if (state.n_qubits() != c.n_qubits()) {
        throw ContractViolation("state width differs from circuit width");
    }
    Matrix m = state.amplitudes();
    for (const Gate& g : c.gates()) {
        apply_gate(g, m, c.n_qubits());
    }
    return StateVector(Vector(m.col(0)));
}

std::string circuit_to_text(const Circuit& c) {
    std::ostringstream out;
    out << "# qubits " << c.n_qubits() << '\n';
    write_gates(out, c.gates(), 0);
    return out.str();
}

CircuitParseError::CircuitParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

Circuit parse_circuit(std::string_view text, int n_qubits) {
    Parser parser(tokenize(text), n_qubits);
    std::vector<Gate> list = parser.parse_block(false);
    Circuit c(n_qubits);
    for (Gate& g : list) {
        try {
            c.add(std::move(g));
        } catch (const ContractViolation& e) {
            throw CircuitParseError(0, e.what());
        }
    }
    return c;
}

// ----------------------------------------------------------------- builders

Circuit build_bidder_circuit(const BidSpec& bid, int offset, int width) {
    if (width < 0) {
        width = offset + bid.width();
    }
    if (offset < 0 || offset + bid.width() > width) {
        throw ContractViolation("bidder register does not fit in the circuit");
    }
    Circuit c(width);
    const std::vector<int> set = bid.set_qubits();
    c.h(offset + set.front());
    for (std::size_t k = 1; k < set.size(); ++k) {
        c.cnot(offset + set.front(), offset + set[k]);
    }
    return c;
}

Circuit build_joint_bidder_circuit(std::span<const BidSpec> bids) {
    int width = 0;
    for (const BidSpec& b : bids) width += b.width();
    if (bids.empty()) throw ContractViolation("at least one bidder is required");
    Circuit c(width);
    int offset = 0;
    for (const BidSpec& b : bids) {
        c.append(build_bidder_circuit(b, offset, width));
        offset += b.width();
    }
    return c;
}

Circuit build_D_circuit(double delta, double f, int n_qubits) {
    Circuit c(n_qubits);
    for (int q = 0; q < n_qubits; ++q) {
        c.phase(q, f * delta);
    }
    return c;
}

Circuit build_zz_exponential(std::span<const int> qubits, double theta, int n_qubits) {
    if (qubits.empty()) {
        throw ContractViolation("Z-string exponential needs at least one qubit");
    }
    Circuit c(n_qubits);
    const int last = qubits.back();
    for (std::size_t i = 0; i + 1 < qubits.size(); ++i) {
        c.cnot(qubits[i], last);
    }
    c.phase(last, 2.0 * theta);
    for (std::size_t i = qubits.size() - 1; i-- > 0;) {
        c.cnot(qubits[i], last);
    }
    return c;
}

Circuit build_P_circuit(std::span<const PauliZTerm> expansion, double delta, double f, int n_qubits) {
    Circuit c(n_qubits);
    for (const PauliZTerm& t : expansion) {
        if (t.qubits.empty()) {
            continue;
        }
        c.append(build_zz_exponential(t.qubits, -f * delta * t.coefficient, n_qubits));
    }
    return c;
}

Circuit build_collusion_circuit(const BidSpec& bid1, const BidSpec& bid2, std::pair<double, double> keep) {
    const auto [a, b] = keep;
    if (!(a >= 0.0 && b >= 0.0) || std::abs(a * a + b * b - 1.0) > tolerance::kNormalization) {
        throw ContractViolation("keep amplitudes must be non-negative with unit norm");
    }
    const int p1 = bid1.width();
    const int width = p1 + bid2.width();
    Circuit c = build_bidder_circuit(bid1, 0, width);

    const std::vector<int> set = bid1.set_qubits();
    const int lead = set.front();
    Circuit fan(width);
    for (std::size_t k = 1; k < set.size(); ++k) {
        fan.cnot(lead, set[k]);
    }
    const double theta = std::atan2((a + b) / std::numbers::sqrt2, (a - b) / std::numbers::sqrt2);
    Circuit rotation(width);
    rotation.rot(lead, theta);
    std::vector<int> others;
    for (int q = 0; q < p1; ++q) {
        if (q != lead) others.push_back(q);
    }
    c.append(fan.inverse());
    c.zero_controlled(others, rotation);
    c.append(fan);

    std::vector<int> bidder1(static_cast<std::size_t>(p1));
    for (int q = 0; q < p1; ++q) bidder1[static_cast<std::size_t>(q)] = q;
    c.zero_controlled(bidder1, build_bidder_circuit(bid2, p1, width));
    return c;
}

VerifyReport verify_circuit(const Circuit& c, const DenseOperator& target) {
    if (target.n_qubits() != c.n_qubits()) {
        throw ContractViolation("circuit and target act on different registers");
    }
    VerifyReport r;
    r.distance = phase_invariant_distance(circuit_to_matrix(c), target);
    r.pass = r.distance <= tolerance::kChained;
    return r;
}

}  // namespace qauction
