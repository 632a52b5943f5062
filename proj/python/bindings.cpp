#include "qauction/adversary.hpp"
#include "qauction/circuits.hpp"
#include "qauction/commands.hpp"
#include "qauction/protocol.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>

namespace py = pybind11;
using namespace qauction;

namespace {

std::vector<BidSpec> to_bids(const std::vector<std::string>& bits) {
    std::vector<BidSpec> out;
    for (const auto& b : bits) out.emplace_back(b);
    return out;
}

PayoffTable to_table(const std::vector<double>& values) {
    return PayoffTable(qubits_for_dimension(values.size()), values);
}

AdiabaticSchedule make_schedule(int steps, double delta, const std::string& variant) {
    return AdiabaticSchedule{steps, delta, parse_variant(variant), std::nullopt};
}

ScenarioConfig settings_config(const std::map<std::string, std::string>& settings) {
    std::vector<std::string> overrides;
    for (const auto& [k, v] : settings) overrides.push_back(k + "=" + v);
    return parse_config("", overrides);
}

py::dict curve_dict(const LearningCurve& c) {
    py::dict d;
    d["rounds"] = c.rounds;
    d["value"] = c.value;
    d["std_error"] = c.std_error;
    return d;
}

}  // namespace

PYBIND11_MODULE(_qauction, m) {
    m.doc() = "Dense simulator for auctions run by discrete adiabatic search";

    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
    py::register_exception<TieError>(m, "TieError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<CircuitParseError>(m, "CircuitParseError", PyExc_ValueError);

    py::class_<Trajectory>(m, "Trajectory")
        .def_readonly("winner_index", &Trajectory::winner_index)
        .def_readonly("plausible", &Trajectory::plausible)
        .def_property_readonly("success",
                               [](const Trajectory& t) {
                                   std::vector<double> v;
                                   for (const auto& r : t.steps) v.push_back(r.success_probability);
                                   return v;
                               })
        .def_property_readonly("leakage",
                               [](const Trajectory& t) {
                                   std::vector<double> v;
                                   for (const auto& r : t.steps) v.push_back(r.subspace_leakage);
                                   return v;
                               })
        .def_property_readonly("final_probabilities",
                               [](const Trajectory& t) { return t.final_step().state.probabilities(); })
        .def_property_readonly("final_state", [](const Trajectory& t) { return t.final_step().state.amplitudes(); })
        .def("final_argmax", &Trajectory::final_argmax)
        .def("final_global_argmax", &Trajectory::final_global_argmax);

    m.def(
        "first_price_table",
        [](int bidders, int qubits) { return build_first_price_table(AuctionConfig(bidders, qubits)).values(); },
        py::arg("bidders") = 2, py::arg("qubits_per_bidder") = 2);
    m.def(
        "spurious_table", [](int bidders, int qubits) { return spurious_table(AuctionConfig(bidders, qubits)).values(); },
        py::arg("bidders") = 2, py::arg("qubits_per_bidder") = 2);
    m.def("pauli_z_expansion", [](const std::vector<double>& values) {
        std::vector<std::pair<std::vector<int>, double>> out;
        for (const auto& t : pauli_z_expansion(to_table(values))) out.emplace_back(t.qubits, t.coefficient);
        return out;
    });
    m.def("bidding_operator", [](const std::string& bits) { return bidding_operator(BidSpec(bits)).matrix(); });
    m.def(
        "locking_operator", [](double alpha, const std::string& bits) { return locking_operator(alpha, BidSpec(bits)).matrix(); },
        py::arg("alpha"), py::arg("bid"));

    m.def(
        "run_adiabatic",
        [](const std::vector<std::string>& bids, const std::vector<double>& table, int steps, double delta,
           const std::string& variant) {
            return run_adiabatic(to_bids(bids), to_table(table), make_schedule(steps, delta, variant));
        },
        py::arg("bids"), py::arg("table"), py::arg("steps") = 20, py::arg("delta") = 1.5, py::arg("variant") = "zeroth");
    m.def(
        "run_spurious_attack",
        [](const std::vector<std::string>& bids, int steps, double delta) {
            return run_spurious_attack(to_bids(bids), make_schedule(steps, delta, "zeroth"));
        },
        py::arg("bids"), py::arg("steps") = 20, py::arg("delta") = 1.5);
    m.def(
        "run_collusion_defense",
        [](const std::vector<std::string>& bids, const std::vector<double>& table, int steps, double delta) {
            return run_collusion_defense(to_bids(bids), to_table(table), make_schedule(steps, delta, "zeroth"));
        },
        py::arg("bids"), py::arg("table"), py::arg("steps") = 20, py::arg("delta") = 1.5);
    m.def(
        "eigenvalue_tracks",
        [](const std::vector<std::string>& bids, const std::vector<double>& table, int steps, bool restrict) {
            const EigenTracks t =
                eigenvalue_tracks(to_bids(bids), to_table(table), make_schedule(steps, 1.0, "zeroth"), restrict);
            py::dict d;
            d["f"] = t.f;
            d["eigenvalues"] = t.eigenvalues;
            d["gaps"] = t.gaps;
            d["g_min"] = t.g_min;
            return d;
        },
        py::arg("bids"), py::arg("table"), py::arg("steps") = 20, py::arg("restrict") = true);

    m.def(
        "min_error_povm",
        [](const std::vector<Vector>& states, const std::vector<double>& priors, std::uint64_t seed) {
            std::vector<StateVector> s;
            for (const auto& v : states) s.emplace_back(v);
            PovmSearchOptions opt;
            opt.seed = seed;
            const PovmResult r = min_error_povm(s, priors, opt);
            return py::make_tuple(r.povm.elements(), r.error);
        },
        py::arg("states"), py::arg("priors"), py::arg("seed") = 0);
    m.def("povm_optimality_check", [](const std::vector<Matrix>& elements, const std::vector<Vector>& states,
                                      const std::vector<double>& priors) {
        std::vector<StateVector> s;
        for (const auto& v : states) s.emplace_back(v);
        return povm_optimality_check(Povm(elements), s, priors);
    });
    m.def(
        "probe_attack_basis",
        [](const std::vector<std::string>& bids, int max_rounds, std::optional<std::pair<double, double>> lock) {
            const auto b = to_bids(bids);
            std::optional<LockingPair> pair;
            if (lock) pair = locking_operators(lock->first, lock->second, b.at(0), b.at(1));
            return curve_dict(probe_attack_basis(b, pair, max_rounds));
        },
        py::arg("bids"), py::arg("max_rounds") = 20, py::arg("lock") = py::none());
    m.def(
        "probe_attack_povm",
        [](int max_rounds, double error_probability) { return curve_dict(probe_attack_povm(max_rounds, error_probability)); },
        py::arg("max_rounds"), py::arg("error_probability"));

    m.def(
        "circuit_to_matrix",
        [](const std::string& text, int n_qubits) { return circuit_to_matrix(parse_circuit(text, n_qubits)).matrix(); },
        py::arg("text"), py::arg("n_qubits"));
    m.def(
        "verify_circuit",
        [](const std::string& text, const std::string& target, const std::map<std::string, std::string>& settings) {
            const CircuitCheck c = cmd_circuit_verify(text, target, settings_config(settings));
            return py::make_tuple(c.pass, c.report);
        },
        py::arg("text"), py::arg("target"), py::arg("settings") = std::map<std::string, std::string>{});
    m.def(
        "run_command",
        [](const std::string& name, const std::map<std::string, std::string>& settings) {
            const ScenarioConfig c = settings_config(settings);
            if (name == "converge") return cmd_converge(c);
            if (name == "variants") return cmd_variants(c);
            if (name == "gap") return cmd_gap(c);
            if (name == "attack") return cmd_attack(c);
            if (name == "povm") return cmd_povm(c);
            throw ConfigError("unknown command '" + name + "'");
        },
        py::arg("name"), py::arg("settings") = std::map<std::string, std::string>{});
}
