// Command-line front end: ousc <command> --config run.ini [overrides]

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "ousc/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Rate-control solver: special functions, HJB finite differences, free "
                 "boundaries, Dynkin games and reflected simulation"};
    std::string command, config;
    ousc::Overrides ov;
    app.add_option("command", command, "one of: characteristics, vhat, solve-fd, solve-fb, "
                                       "dynkin, simulate, verify")
        ->required()
        ->check(CLI::IsMember(ousc::kCommands));
    app.add_option("-c,--config", config, "INI config file")->required();
    app.add_option("-o,--output", ov.output_dir,
                   "output directory (overrides $OUSC_OUTPUT_DIR and [output] dir)");
    app.add_option("--seed", ov.seed, "override [sim] seed");
    app.add_option("--paths", ov.paths, "override [sim] paths");
    app.add_option("--tol", ov.tol, "override [solver] tol");
    app.add_option("--init", ov.init, "solve-fb starting point: fd (default) or zeta")
        ->check(CLI::IsMember({"fd", "zeta"}));
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : ousc::kConfigError;
    }

    const ousc::ExitReport rep = ousc::run_from_file(command, config, ov);
    if (!rep.summary.empty()) std::cout << rep.summary << (rep.summary.back() == '\n' ? "" : "\n");
    for (const auto& f : rep.outputs) std::cout << "wrote " << f << '\n';
    if (!rep.error.empty()) std::cerr << "error: " << rep.error << '\n';
    return rep.exit_code;
}
