#include "qauction/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Adiabatic quantum auction simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    qauction::Invocation inv;
    std::string output;
    int jobs = 0;
    app.add_option("-c,--config", inv.config_path, "key = value scenario file");
    app.add_option("-s,--set", inv.overrides, "override a config key (key=value), repeatable");
    app.add_option("-o,--output", output, "write output here instead of stdout");
    app.add_option("-j,--jobs", jobs, "worker threads for Monte Carlo curves")->check(CLI::Range(1, 256));

    app.add_subcommand("converge", "success probability per step");
    app.add_subcommand("variants", "exact, zeroth and first order iterations side by side");
    app.add_subcommand("gap", "restricted eigenvalue tracks and minimum gap");
    app.add_subcommand("attack", "auctioneer learning curves or spurious-table convergence");
    app.add_subcommand("povm", "minimum-error measurement for the configured states");
    auto* verify = app.add_subcommand("circuit-verify", "compare a circuit file with a named unitary");
    verify->add_option("circuit", inv.circuit_path, "circuit text file")->required();
    verify->add_option("-t,--target", inv.target, "bidder:<bits> | D:<delta>,<f> | P:<delta>,<f> | collusion:<b1>,<b2>")
        ->required();
    auto* emit = app.add_subcommand("circuit-emit", "print a builder circuit in the text format");
    emit->add_option("-t,--target", inv.target, "same target names as circuit-verify")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return qauction::exit_code::kConfig;
    }

    inv.command = app.get_subcommands().front()->get_name();
    if (!output.empty()) inv.overrides.push_back("output=" + output);
    if (jobs > 0) inv.overrides.push_back("jobs=" + std::to_string(jobs));
    return qauction::run_invocation(inv, std::cout, std::cerr);
}
