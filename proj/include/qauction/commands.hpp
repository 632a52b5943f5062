#pragma once

// Subcommands of the qauction tool. Each returns its full output text so the
// caller can write it atomically.

#include "qauction/circuits.hpp"
#include "qauction/scenario.hpp"

#include <iosfwd>
#include <string>
#include <string_view>

namespace qauction {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kConfig = 1;
inline constexpr int kContract = 2;
inline constexpr int kMismatch = 3;
}  // namespace exit_code

/// "%.12g".
std::string format_number(double v);

/// s,f,success_prob,leakage
std::string cmd_converge(const ScenarioConfig& config);
/// s,f,exact,zeroth,first
std::string cmd_variants(const ScenarioConfig& config);
/// s,f,lambda0..,gap then "# g_min=<value>"
std::string cmd_gap(const ScenarioConfig& config);
/// Learning curves, or the revealing-state curve when attack=spurious.
std::string cmd_attack(const ScenarioConfig& config);
std::string cmd_povm(const ScenarioConfig& config);

/// Target names: bidder:<bits>, D:<delta>,<f>, P:<delta>,<f>, collusion:<b1>,<b2>.
/// P and D act on the register described by config.bids.
DenseOperator circuit_target(std::string_view target, const ScenarioConfig& config);
Circuit circuit_builder(std::string_view target, const ScenarioConfig& config);

struct CircuitCheck {
    std::string report;
    bool pass = false;
};
CircuitCheck cmd_circuit_verify(std::string_view circuit_text, std::string_view target, const ScenarioConfig& config);
std::string cmd_circuit_emit(std::string_view target, const ScenarioConfig& config);

struct Invocation {
    std::string command;
    std::string config_path;  // empty: defaults
    std::vector<std::string> overrides;
    std::string circuit_path;
    std::string target;
};

/// Runs one subcommand, writes output to config.output (atomically) or `out`,
/// reports errors on `err`, and returns the exit code.
int run_invocation(const Invocation& inv, std::ostream& out, std::ostream& err);

}  // namespace qauction
