#pragma once

// Scenario configuration files for the command line runner.

#include "qauction/adversary.hpp"
#include "qauction/protocol.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qauction {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Attack { None, ProbeBasis, ProbePovm, Spurious };
enum class Defense { None, Lock, Collude };

std::string_view to_string(Attack a);
std::string_view to_string(Defense d);

/// A POVM hypothesis: `bid:<bits>` is a bidding state, `basis:<bits>` a
/// computational basis state.
struct StateSpec {
    enum class Kind { Bid, Basis } kind = Kind::Bid;
    std::string bits;

    StateVector build() const;
    std::string to_string() const;
};

struct ScenarioConfig {
    std::vector<BidSpec> bids{BidSpec("10"), BidSpec("11")};
    int steps = 20;
    std::optional<double> delta = 1.5;  // nullopt: 1/sqrt(steps)
    Variant variant = Variant::Zeroth;
    Attack attack = Attack::None;
    Defense defense = Defense::None;
    double lock_alpha1 = 0.9;
    double lock_alpha2 = 0.7;
    std::string table = "first_price";  // first_price | spurious
    std::uint64_t seed = 0;
    std::size_t trials = 100000;
    int max_n = 20;
    std::vector<StateSpec> states;  // empty: every bidding state of the bid width
    std::vector<double> priors;     // empty: uniform
    std::string output;             // empty: standard output
    int jobs = 1;

    double step_size() const;
    AdiabaticSchedule schedule() const;
    PayoffTable payoff_table() const;
    std::optional<LockingPair> locking() const;
    std::vector<StateVector> hypotheses() const;
    std::vector<double> hypothesis_priors() const;

    /// Cross-field checks; throws ConfigError.
    void validate() const;
};

/// Parses `key = value` lines (`#` comments, blank lines ignored), then applies
/// `overrides` of the same form. Unknown or repeated keys are errors.
ScenarioConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});
ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {});

/// Applies one `key=value` assignment.
void apply_setting(ScenarioConfig& config, std::string_view key, std::string_view value);

/// Writes the file through a temporary sibling and a rename.
void write_file_atomic(const std::string& path, std::string_view contents);

}  // namespace qauction
