#include "qauction/commands.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

namespace qauction {

namespace {

std::string bits_of(std::size_t x, int n) {
    std::string s(static_cast<std::size_t>(n), '0');
    for (int q = 0; q < n; ++q) {
        if (qubit_bit(x, q, n)) s[static_cast<std::size_t>(q)] = '1';
    }
    return s;
}

std::string join_bids(const std::vector<BidSpec>& bids) {
    std::string s;
    for (std::size_t i = 0; i < bids.size(); ++i) {
        s += (i ? "," : "") + bids[i].bits();
    }
    return s;
}

struct Prepared {
    PayoffTable table;
    SearchOperators ops;
    AdiabaticSchedule schedule;
    std::optional<std::size_t> target;
};

Prepared prepare(const ScenarioConfig& c) {
    PayoffTable table = c.payoff_table();
    AdiabaticSchedule schedule = c.schedule();
    DenseOperator u = c.defense == Defense::Collude ? circuit_to_matrix(build_collusion_circuit(c.bids[0], c.bids[1]))
                                                    : joint_bidding_operator(c.bids);
    SearchOperators ops(std::move(u), table, schedule.locking);
    std::optional<std::size_t> target;
    if (c.attack == Attack::Spurious) {
        target = revealing_index(c.bids);
    }
    return Prepared{std::move(table), std::move(ops), std::move(schedule), target};
}

void header_comments(std::ostringstream& out, const ScenarioConfig& c, const AdiabaticSchedule& s) {
    out << "# bids=" << join_bids(c.bids) << '\n';
    out << "# steps=" << s.steps << " delta=" << format_number(s.delta) << " variant=" << to_string(s.variant)
        << '\n';
    out << "# table=" << (c.attack == Attack::Spurious ? "spurious" : c.table) << " attack=" << to_string(c.attack)
        << " defense=" << to_string(c.defense) << '\n';
}

std::string trajectory_csv(const ScenarioConfig& c, const char* success_column) {
    Prepared p = prepare(c);
    const Trajectory t = run_search(p.ops, p.table, p.schedule, p.target);
    const int n = p.ops.n_qubits();
    std::ostringstream out;
    header_comments(out, c, p.schedule);
    out << "# target=" << bits_of(t.winner_index, n) << '\n';
    out << "s,f," << success_column << ",leakage\n";
    for (const StepRecord& r : t.steps) {
        out << r.s << ',' << format_number(r.f) << ',' << format_number(r.success_probability) << ','
            << format_number(r.subspace_leakage) << '\n';
    }
    out << "# final_argmax=" << bits_of(t.final_global_argmax(), n) << '\n';
    return out.str();
}

std::pair<double, double> parse_pair(std::string_view spec, std::string_view what) {
    const auto comma = spec.find(',');
    if (comma == std::string_view::npos) {
        throw ConfigError("target '" + std::string(what) + "' needs two comma-separated values");
    }
    auto number = [&](std::string_view s) {
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
            throw ConfigError("target '" + std::string(what) + "': bad number '" + std::string(s) + "'");
        }
        return v;
    };
    return {number(spec.substr(0, comma)), number(spec.substr(comma + 1))};
}

struct TargetSpec {
    std::string kind;
    std::string arg;
};

TargetSpec split_target(std::string_view target) {
    const auto colon = target.find(':');
    if (colon == std::string_view::npos) {
        throw ConfigError("target '" + std::string(target) + "' must look like kind:args");
    }
    return {std::string(target.substr(0, colon)), std::string(target.substr(colon + 1))};
}

BidSpec target_bid(std::string_view bits, std::string_view target) {
    if (bits.empty() || bits.size() > 12 || bits.find_first_not_of("01") != std::string_view::npos ||
        bits.find('1') == std::string_view::npos) {
        throw ConfigError("target '" + std::string(target) + "': bad bid '" + std::string(bits) + "'");
    }
    return BidSpec(bits);
}

int register_width(const ScenarioConfig& c) {
    int n = 0;
    for (const BidSpec& b : c.bids) n += b.width();
    return n;
}

// Dense form of the collusion unitary: (R U1 (x) I) then U2 on bidder 2
// controlled on bidder 1 being |0...0>. R is the two-level map in the
// {|0>, |b1>} plane sending (|0>+|b1>)/sqrt2 to a|0> + b|b1>.
DenseOperator collusion_dense(const BidSpec& b1, const BidSpec& b2, double a, double b) {
    const auto d1 = static_cast<Eigen::Index>(std::size_t{1} << b1.width());
    const double c = (a - b) / std::sqrt(2.0);
    const double s = (a + b) / std::sqrt(2.0);
    Matrix r = Matrix::Identity(d1, d1);
    const auto v = static_cast<Eigen::Index>(b1.value());
    r(0, 0) = c;
    r(0, v) = s;
    r(v, 0) = s;
    r(v, v) = -c;
    const Matrix stage1 = tensor_product(DenseOperator(r * bidding_operator(b1).matrix()), DenseOperator::identity(b2.width())).matrix();
    Matrix p0 = Matrix::Zero(d1, d1);
    p0(0, 0) = 1.0;
    const Matrix stage2 = tensor_product(DenseOperator(p0), bidding_operator(b2)).matrix() +
                          tensor_product(DenseOperator(Matrix(Matrix::Identity(d1, d1) - p0)), DenseOperator::identity(b2.width())).matrix();
    return DenseOperator(stage2 * stage1);
}

std::string complex_text(Complex z) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g%+.12gi", z.real() == 0.0 ? 0.0 : z.real(), z.imag() == 0.0 ? 0.0 : z.imag());
    return buf;
}

}  // namespace

std::string format_number(double v) {
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string cmd_converge(const ScenarioConfig& config) {
    return trajectory_csv(config, config.attack == Attack::Spurious ? "revealing_prob" : "success_prob");
}

std::string cmd_variants(const ScenarioConfig& config) {
    const PayoffTable table = config.payoff_table();
    const SearchOperators ops(joint_bidding_operator(config.bids), table);
    std::vector<Trajectory> runs;
    for (Variant v : {Variant::Exact, Variant::Zeroth, Variant::First}) {
        AdiabaticSchedule s{config.steps, config.step_size(), v, std::nullopt};
        runs.push_back(run_search(ops, table, s));
    }
    std::ostringstream out;
    out << "# bids=" << join_bids(config.bids) << '\n';
    out << "# steps=" << config.steps << " delta=" << format_number(config.step_size()) << '\n';
    out << "s,f,exact,zeroth,first\n";
    for (std::size_t i = 0; i < runs[0].steps.size(); ++i) {
        out << runs[0].steps[i].s << ',' << format_number(runs[0].steps[i].f);
        for (const Trajectory& t : runs) out << ',' << format_number(t.steps[i].success_probability);
        out << '\n';
    }
    return out.str();
}

std::string cmd_gap(const ScenarioConfig& config) {
    Prepared p = prepare(config);
    const EigenTracks tracks = eigenvalue_tracks(p.ops, p.schedule, true);
    std::ostringstream out;
    header_comments(out, config, p.schedule);
    out << "s,f";
    const std::size_t k = tracks.eigenvalues.front().size();
    for (std::size_t j = 0; j < k; ++j) out << ",lambda" << j;
    out << ",gap\n";
    for (std::size_t i = 0; i < tracks.s.size(); ++i) {
        out << tracks.s[i] << ',' << format_number(tracks.f[i]);
        for (double e : tracks.eigenvalues[i]) out << ',' << format_number(e);
        out << ',' << format_number(tracks.gaps[i]) << '\n';
    }
    out << "# g_min=" << format_number(tracks.g_min) << '\n';
    return out.str();
}

std::string cmd_attack(const ScenarioConfig& config) {
    if (config.attack == Attack::Spurious) {
        return trajectory_csv(config, "revealing_prob");
    }
    const int width = config.bids.front().width();
    const MonteCarloOptions mc_basis{derive_seed(config.seed, 1), config.trials, config.jobs};
    const MonteCarloOptions mc_povm{derive_seed(config.seed, 2), config.trials, config.jobs};
    PovmSearchOptions search;
    search.seed = config.seed;

    std::vector<std::size_t> truth;
    for (const BidSpec& b : config.bids) truth.push_back(b.value() - 1);

    struct Columns {
        LearningCurve basis_closed, basis_mc, povm_closed, povm_mc;
        std::vector<double> pe;
    };
    auto curves = [&](const std::optional<LockingPair>& lock, const MonteCarloOptions& mb, const MonteCarloOptions& mp) {
        Columns cols;
        cols.basis_closed = probe_attack_basis(config.bids, lock, config.max_n);
        cols.basis_mc = probe_attack_basis_mc(config.bids, lock, config.max_n, mb);
        std::vector<std::vector<double>> outcome;
        for (std::size_t i = 0; i < config.bids.size(); ++i) {
            std::optional<double> alpha;
            if (lock) alpha = i == 0 ? lock->alpha1 : lock->alpha2;
            const auto hyp = bid_hypotheses(width, alpha);
            const std::vector<double> pri(hyp.size(), 1.0 / static_cast<double>(hyp.size()));
            const PovmResult r = min_error_povm(hyp, pri, search);
            cols.pe.push_back(r.error);
            outcome.push_back(measurement_probabilities(hyp[truth[i]], r.povm.elements()));
        }
        cols.povm_closed = lock ? probe_attack_povm(config.max_n, cols.pe)
                                : probe_attack_povm(config.max_n, cols.pe.front());
        cols.povm_mc = probe_attack_povm_mc(outcome, truth, config.max_n, mp);
        return cols;
    };
    const Columns plain = curves(std::nullopt, mc_basis, mc_povm);
    std::optional<Columns> locked;
    if (config.defense == Defense::Lock) {
        locked = curves(config.locking(), MonteCarloOptions{derive_seed(config.seed, 3), config.trials, config.jobs},
                        MonteCarloOptions{derive_seed(config.seed, 4), config.trials, config.jobs});
    }

    std::ostringstream out;
    out << "# bids=" << join_bids(config.bids) << " trials=" << config.trials << " seed=" << config.seed << '\n';
    out << "# P_e=" << format_number(plain.pe.front()) << '\n';
    if (locked) {
        out << "# lock_alpha=" << format_number(config.lock_alpha1) << ',' << format_number(config.lock_alpha2);
        for (std::size_t i = 0; i < locked->pe.size(); ++i) out << " P_e" << i + 1 << "=" << format_number(locked->pe[i]);
        out << '\n';
    }
    out << "N,basis_closed,basis_mc,povm_closed,povm_mc";
    if (locked) out << ",basis_closed_locked,basis_mc_locked,povm_closed_locked,povm_mc_locked";
    out << '\n';
    for (std::size_t i = 0; i < plain.basis_closed.rounds.size(); ++i) {
        out << plain.basis_closed.rounds[i];
        const std::vector<const Columns*> sets = locked ? std::vector<const Columns*>{&plain, &*locked}
                                                        : std::vector<const Columns*>{&plain};
        for (const Columns* cols : sets) {
            out << ',' << format_number(cols->basis_closed.value[i]) << ',' << format_number(cols->basis_mc.value[i])
                << ',' << format_number(cols->povm_closed.value[i]) << ',' << format_number(cols->povm_mc.value[i]);
        }
        out << '\n';
    }
    return out.str();
}

std::string cmd_povm(const ScenarioConfig& config) {
    const std::vector<StateVector> states = config.hypotheses();
    const std::vector<double> priors = config.hypothesis_priors();
    PovmSearchOptions search;
    search.seed = config.seed;
    const PovmResult r = min_error_povm(states, priors, search);
    const OptimalityReport rep = povm_optimality_report(r.povm, states, priors);
    std::ostringstream out;
    out << "# states=";
    if (config.states.empty()) {
        out << "bidding states of width " << config.bids.front().width();
    } else {
        for (std::size_t i = 0; i < config.states.size(); ++i) out << (i ? "," : "") << config.states[i].to_string();
    }
    out << '\n';
    out << "# priors=";
    for (std::size_t i = 0; i < priors.size(); ++i) out << (i ? "," : "") << format_number(priors[i]);
    out << '\n';
    out << "P_e=" << format_number(r.error) << '\n';
    out << "optimal=" << (rep.optimal ? "true" : "false") << '\n';
    out << "hermitian_residual=" << format_number(rep.hermitian_residual) << '\n';
    out << "min_eigenvalue=" << format_number(rep.min_eigenvalue) << '\n';
    for (std::size_t k = 0; k < r.povm.size(); ++k) {
        out << "Pi_" << k << '\n';
        const Matrix& m = r.povm.elements()[k];
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                out << (j ? "," : "") << complex_text(m(i, j));
            }
            out << '\n';
        }
    }
    return out.str();
}

DenseOperator circuit_target(std::string_view target, const ScenarioConfig& config) {
    const TargetSpec t = split_target(target);
    if (t.kind == "bidder") {
        return bidding_operator(target_bid(t.arg, target));
    }
    if (t.kind == "D" || t.kind == "P") {
        const auto [delta, f] = parse_pair(t.arg, target);
        const double tau = delta * f;
        if (t.kind == "D") {
            return evolve_hermitian(hamming_hamiltonian(register_width(config)), tau);
        }
        return evolve_hermitian(problem_hamiltonian(config.payoff_table()), tau);
    }
    if (t.kind == "collusion") {
        const auto comma = t.arg.find(',');
        if (comma == std::string::npos) throw ConfigError("collusion target needs two bids");
        const BidSpec b1 = target_bid(std::string_view(t.arg).substr(0, comma), target);
        const BidSpec b2 = target_bid(std::string_view(t.arg).substr(comma + 1), target);
        return collusion_dense(b1, b2, std::sqrt(2.0 / 3.0), std::sqrt(1.0 / 3.0));
    }
    throw ConfigError("unknown circuit target kind '" + t.kind + "'");
}

Circuit circuit_builder(std::string_view target, const ScenarioConfig& config) {
    const TargetSpec t = split_target(target);
    if (t.kind == "bidder") {
        return build_bidder_circuit(target_bid(t.arg, target));
    }
    if (t.kind == "D") {
        const auto [delta, f] = parse_pair(t.arg, target);
        return build_D_circuit(delta, f, register_width(config));
    }
    if (t.kind == "P") {
        const auto [delta, f] = parse_pair(t.arg, target);
        return build_P_circuit(pauli_z_expansion(config.payoff_table()), delta, f, register_width(config));
    }
    if (t.kind == "collusion") {
        const auto comma = t.arg.find(',');
        if (comma == std::string::npos) throw ConfigError("collusion target needs two bids");
        return build_collusion_circuit(target_bid(std::string_view(t.arg).substr(0, comma), target),
                                       target_bid(std::string_view(t.arg).substr(comma + 1), target));
    }
    throw ConfigError("unknown circuit target kind '" + t.kind + "'");
}

CircuitCheck cmd_circuit_verify(std::string_view circuit_text, std::string_view target, const ScenarioConfig& config) {
    const DenseOperator dense = circuit_target(target, config);
    const Circuit c = parse_circuit(circuit_text, dense.n_qubits());
    const VerifyReport r = verify_circuit(c, dense);
    std::ostringstream out;
    char dist[32];
    std::snprintf(dist, sizeof dist, "%.6e", r.distance);
    out << "target=" << target << '\n';
    out << "gates=" << c.size() << '\n';
    out << "distance=" << dist << '\n';
    out << "pass=" << (r.pass ? "true" : "false") << '\n';
    return CircuitCheck{out.str(), r.pass};
}

std::string cmd_circuit_emit(std::string_view target, const ScenarioConfig& config) {
    return circuit_to_text(circuit_builder(target, config));
}

int run_invocation(const Invocation& inv, std::ostream& out, std::ostream& err) {
    try {
        const ScenarioConfig config =
            inv.config_path.empty() ? parse_config("", inv.overrides) : load_config(inv.config_path, inv.overrides);
        std::string text;
        int code = exit_code::kOk;
        const std::string& cmd = inv.command;
        if (cmd == "converge") {
            text = cmd_converge(config);
        } else if (cmd == "variants") {
            text = cmd_variants(config);
        } else if (cmd == "gap") {
            text = cmd_gap(config);
        } else if (cmd == "attack") {
            text = cmd_attack(config);
        } else if (cmd == "povm") {
            text = cmd_povm(config);
        } else if (cmd == "circuit-verify" || cmd == "circuit-emit") {
            if (inv.target.empty()) throw ConfigError(cmd + " needs --target");
            if (cmd == "circuit-emit") {
                text = cmd_circuit_emit(inv.target, config);
            } else {
                if (inv.circuit_path.empty()) throw ConfigError("circuit-verify needs a circuit file");
                std::ifstream in(inv.circuit_path, std::ios::binary);
                if (!in) throw ConfigError("cannot read circuit file '" + inv.circuit_path + "'");
                std::ostringstream buf;
                buf << in.rdbuf();
                const CircuitCheck check = cmd_circuit_verify(buf.str(), inv.target, config);
                text = check.report;
                code = check.pass ? exit_code::kOk : exit_code::kMismatch;
            }
        } else {
            throw ConfigError("unknown command '" + cmd + "'");
        }
        if (config.output.empty()) {
            out << text;
            out.flush();
        } else {
            write_file_atomic(config.output, text);
        }
        return code;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_code::kConfig;
    } catch (const CircuitParseError& e) {
        err << "circuit parse error: " << e.what() << '\n';
        return exit_code::kConfig;
    } catch (const TieError& e) {
        err << "tie error: " << e.what() << '\n';
        return exit_code::kContract;
    } catch (const ContractViolation& e) {
        err << "contract violation: " << e.what() << '\n';
        return exit_code::kContract;
    } catch (const std::out_of_range& e) {
        err << "contract violation: " << e.what() << '\n';
        return exit_code::kContract;
    }
}

}  // namespace qauction
