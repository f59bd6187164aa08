#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "bvqft/commands.hpp"
#include "bvqft/instance.hpp"
#include "bvqft/solver.hpp"

using namespace bvqft;

namespace {

int run(const std::string& command, const std::string& path, const CommandOptions& opt,
        const std::string& report_path) {
    AlgebraSpec spec;
    try {
        spec = load_instance(path);
    } catch (const std::exception& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 3;
    }
    CommandResult res;
    try {
        if (command == "validate")
            res = cmd_validate(spec);
        else if (command == "solve")
            res = cmd_solve(spec, opt);
        else if (command == "observables")
            res = cmd_observables(spec, opt);
        else
            res = cmd_wdvv(spec, opt);
    } catch (const AnomalyError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cout << res.human;
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) {
            std::cerr << "cannot write report to " << report_path << "\n";
            return 3;
        }
        out << res.report_json;
    }
    return res.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact solver for finite-dimensional BV master equations"};
    app.require_subcommand(1);

    std::string path, report_path;
    CommandOptions opt;
    long seed_arg = 0;

    auto add_common = [&](CLI::App* sub, bool with_solver_flags) {
        sub->add_option("instance", path, "instance file (JSON)")->required();
        sub->add_option("--report", report_path, "write the machine-readable report here");
        if (with_solver_flags) {
            sub->add_option("--order", opt.order, "solve order in the coordinates (overrides the file)");
            sub->add_option("--hbar-max", opt.hbar_max, "transfer depth in the parameter (overrides the file)");
            sub->add_option("--seed", seed_arg, "section perturbation seed");
        }
    };
    add_common(app.add_subcommand("validate", "check every algebra axiom"), false);
    add_common(app.add_subcommand("solve", "solve the master equation and certify the tensor"), true);
    add_common(app.add_subcommand("observables", "coordinates, correlators, generating function, free energy"), true);
    add_common(app.add_subcommand("wdvv", "pairings, metric, potential, quartic residual"), true);

    CLI11_PARSE(app, argc, argv);
    opt.seed = static_cast<uint64_t>(seed_arg);
    return run(app.get_subcommands().front()->get_name(), path, opt, report_path);
}
