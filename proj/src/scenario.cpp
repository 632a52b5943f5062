#include "qauction/scenario.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace qauction {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_list(std::string_view value) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        const std::size_t end = std::min(value.find(',', start), value.size());
        out.push_back(trim(value.substr(start, end - start)));
        start = end + 1;
    }
    return out;
}

[[noreturn]] void bad(std::string_view key, std::string_view value, std::string_view why) {
    throw ConfigError("invalid value '" + std::string(value) + "' for '" + std::string(key) + "': " +
                      std::string(why));
}

double parse_double(std::string_view key, std::string_view value) {
    double v = 0.0;
    const auto* end = value.data() + value.size();
    const auto res = std::from_chars(value.data(), end, v);
    if (value.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
        bad(key, value, "expected a number");
    }
    return v;
}

long long parse_int(std::string_view key, std::string_view value, long long lo, long long hi) {
    long long v = 0;
    const auto* end = value.data() + value.size();
    const auto res = std::from_chars(value.data(), end, v);
    if (value.empty() || res.ec != std::errc() || res.ptr != end) {
        bad(key, value, "expected an integer");
    }
    if (v < lo || v > hi) {
        bad(key, value, "out of range [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return v;
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
    std::uint64_t v = 0;
    const auto* end = value.data() + value.size();
    const auto res = std::from_chars(value.data(), end, v);
    if (value.empty() || res.ec != std::errc() || res.ptr != end) {
        bad(key, value, "expected a non-negative 64-bit integer");
    }
    return v;
}

void check_bits(std::string_view key, std::string_view bits) {
    if (bits.empty() || bits.size() > 12 || bits.find_first_not_of("01") != std::string_view::npos) {
        bad(key, bits, "expected a bit string of at most 12 bits");
    }
}

}  // namespace

std::string_view to_string(Attack a) {
    switch (a) {
        case Attack::None: return "none";
        case Attack::ProbeBasis: return "probe_basis";
        case Attack::ProbePovm: return "probe_povm";
        case Attack::Spurious: return "spurious";
    }
    return "none";
}

std::string_view to_string(Defense d) {
    switch (d) {
        case Defense::None: return "none";
        case Defense::Lock: return "lock";
        case Defense::Collude: return "collude";
    }
    return "none";
}

StateVector StateSpec::build() const {
    if (kind == Kind::Basis) {
        std::size_t index = 0;
        for (char c : bits) index = (index << 1) | static_cast<std::size_t>(c == '1');
        return StateVector::basis(static_cast<int>(bits.size()), index);
    }
    const BidSpec bid(bits);
    return bidding_operator(bid) * StateVector::basis(bid.width(), 0);
}

std::string StateSpec::to_string() const { return (kind == Kind::Bid ? "bid:" : "basis:") + bits; }

// ----------------------------------------------------------- ScenarioConfig

double ScenarioConfig::step_size() const { return delta ? *delta : 1.0 / std::sqrt(static_cast<double>(steps)); }

AdiabaticSchedule ScenarioConfig::schedule() const {
    AdiabaticSchedule s{steps, step_size(), variant, std::nullopt};
    if (defense == Defense::Lock) {
        s.variant = Variant::Locked;
        s.locking = locking()->joint();
    }
    return s;
}

PayoffTable ScenarioConfig::payoff_table() const {
    const AuctionConfig config(static_cast<int>(bids.size()), bids.front().width());
    if (table == "spurious" || attack == Attack::Spurious) {
        return spurious_table(config);
    }
    return build_first_price_table(config);
}

std::optional<LockingPair> ScenarioConfig::locking() const {
    if (defense != Defense::Lock) {
        return std::nullopt;
    }
    return locking_operators(lock_alpha1, lock_alpha2, bids[0], bids[1]);
}

std::vector<StateVector> ScenarioConfig::hypotheses() const {
    if (states.empty()) {
        return bid_hypotheses(bids.front().width());
    }
    std::vector<StateVector> out;
    for (const StateSpec& s : states) out.push_back(s.build());
    return out;
}

std::vector<double> ScenarioConfig::hypothesis_priors() const {
    if (!priors.empty()) {
        return priors;
    }
    const std::size_t n = states.empty() ? (std::size_t{1} << bids.front().width()) - 1 : states.size();
    return std::vector<double>(n, 1.0 / static_cast<double>(n));
}

void ScenarioConfig::validate() const {
    if (bids.empty() || bids.size() > 4) {
        throw ConfigError("between one and four bidders are supported");
    }
    int total = 0;
    for (const BidSpec& b : bids) {
        if (b.width() != bids.front().width()) {
            throw ConfigError("all bids must have the same number of qubits");
        }
        total += b.width();
    }
    if (total > 12) {
        throw ConfigError("at most 12 qubits in total are supported");
    }
    if (table != "first_price" && table != "spurious") {
        throw ConfigError("table must be first_price or spurious");
    }
    if ((defense == Defense::Lock || defense == Defense::Collude) && bids.size() != 2) {
        throw ConfigError("defenses are defined for two bidders");
    }
    if (defense == Defense::Lock) {
        for (double a : {lock_alpha1, lock_alpha2}) {
            if (!(a > 0.0 && a <= 1.0)) throw ConfigError("lock_alpha values must lie in (0, 1]");
        }
    }
    if (!states.empty()) {
        for (const StateSpec& s : states) {
            if (s.bits.size() != states.front().bits.size()) {
                throw ConfigError("all POVM states must have the same number of qubits");
            }
        }
    }
    if (!priors.empty()) {
        const std::size_t n = states.empty() ? (std::size_t{1} << bids.front().width()) - 1 : states.size();
        if (priors.size() != n) {
            throw ConfigError("priors must list one value per POVM state (" + std::to_string(n) + ")");
        }
        double sum = 0.0;
        for (double p : priors) {
            if (p < 0.0) throw ConfigError("priors must be non-negative");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("priors must sum to 1");
    }
}

// ------------------------------------------------------------------ parsing

void apply_setting(ScenarioConfig& c, std::string_view key, std::string_view value) {
    value = trim(value);
    if (key == "bids") {
        c.bids.clear();
        for (std::string_view b : split_list(value)) {
            check_bits(key, b);
            if (b.find('1') == std::string_view::npos) bad(key, b, "the all-zero bid is not allowed");
            c.bids.emplace_back(b);
        }
    } else if (key == "steps") {
        c.steps = static_cast<int>(parse_int(key, value, 1, 1000000));
    } else if (key == "delta") {
        if (value == "auto") {
            c.delta.reset();
        } else {
            const double d = parse_double(key, value);
            if (!(d > 0.0)) bad(key, value, "must be positive");
            c.delta = d;
        }
    } else if (key == "variant") {
        if (value == "exact") c.variant = Variant::Exact;
        else if (value == "zeroth") c.variant = Variant::Zeroth;
        else if (value == "first") c.variant = Variant::First;
        else bad(key, value, "expected exact, zeroth or first");
    } else if (key == "attack") {
        if (value == "none") c.attack = Attack::None;
        else if (value == "probe_basis") c.attack = Attack::ProbeBasis;
        else if (value == "probe_povm") c.attack = Attack::ProbePovm;
        else if (value == "spurious") c.attack = Attack::Spurious;
        else bad(key, value, "expected none, probe_basis, probe_povm or spurious");
    } else if (key == "defense") {
        if (value == "none") {
            c.defense = Defense::None;
        } else if (value == "collude") {
            c.defense = Defense::Collude;
        } else if (value == "lock") {
            c.defense = Defense::Lock;
        } else if (value.starts_with("lock(") && value.ends_with(")")) {
            c.defense = Defense::Lock;
            apply_setting(c, "lock_alpha", value.substr(5, value.size() - 6));
        } else {
            bad(key, value, "expected none, lock, lock(a1,a2) or collude");
        }
    } else if (key == "lock_alpha") {
        const auto parts = split_list(value);
        if (parts.size() != 2) bad(key, value, "expected two comma-separated values");
        c.lock_alpha1 = parse_double(key, parts[0]);
        c.lock_alpha2 = parse_double(key, parts[1]);
    } else if (key == "table") {
        if (value != "first_price" && value != "spurious") bad(key, value, "expected first_price or spurious");
        c.table = std::string(value);
    } else if (key == "seed") {
        c.seed = parse_u64(key, value);
    } else if (key == "trials") {
        c.trials = static_cast<std::size_t>(parse_int(key, value, 1, 100000000));
    } else if (key == "max_n") {
        c.max_n = static_cast<int>(parse_int(key, value, 1, 1000));
    } else if (key == "states") {
        c.states.clear();
        if (value.empty()) return;
        for (std::string_view item : split_list(value)) {
            StateSpec s;
            if (item.starts_with("bid:")) {
                s.kind = StateSpec::Kind::Bid;
                item.remove_prefix(4);
                if (item.find('1') == std::string_view::npos) bad(key, item, "bidding states need a nonzero bid");
            } else if (item.starts_with("basis:")) {
                s.kind = StateSpec::Kind::Basis;
                item.remove_prefix(6);
            } else {
                bad(key, item, "expected bid:<bits> or basis:<bits>");
            }
            check_bits(key, item);
            s.bits = std::string(item);
            c.states.push_back(std::move(s));
        }
    } else if (key == "priors") {
        c.priors.clear();
        if (value.empty()) return;
        for (std::string_view item : split_list(value)) c.priors.push_back(parse_double(key, item));
    } else if (key == "output") {
        c.output = std::string(value);
    } else if (key == "jobs") {
        c.jobs = static_cast<int>(parse_int(key, value, 1, 256));
    } else {
        throw ConfigError("unknown configuration key '" + std::string(key) + "'");
    }
}

ScenarioConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
    ScenarioConfig c;
    std::set<std::string, std::less<>> seen;
    int line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        const std::size_t end = std::min(text.find('\n', start), text.size());
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
        }
        const std::string_view key = trim(line.substr(0, eq));
        if (!seen.insert(std::string(key)).second) {
            throw ConfigError("line " + std::to_string(line_no) + ": repeated key '" + std::string(key) + "'");
        }
        try {
            apply_setting(c, key, line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    for (const std::string& o : overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("override '" + o + "' is not key=value");
        }
        apply_setting(c, trim(std::string_view(o).substr(0, eq)), std::string_view(o).substr(eq + 1));
    }
    c.validate();
    return c;
}

ScenarioConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot read config file '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), overrides);
}

void write_file_atomic(const std::string& path, std::string_view contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw ConfigError("cannot write '" + tmp + "'");
        }
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        if (!out) {
            throw ConfigError("write to '" + tmp + "' failed");
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw ConfigError("cannot move output into place at '" + path + "'");
    }
}

}  // namespace qauction
