#include <CLI11.hpp>

#include <iostream>

#include "dshell/app.hpp"

namespace {

using namespace dshell;

struct Cli {
    std::string out;
    bool force = false;
    unsigned threads = 1;
    std::uint64_t seed = 0;
    std::string config;
    bool tamper = false;
};

int finish(const std::string& command, const RunOutcome& r, const Cli& cli, const std::string& config_out) {
    auto dir = resolve_out_dir(cli.out, config_out);
    write_outputs(dir, command, r);
    for (const auto& w : r.report["warnings"]) std::cerr << "warning: " << w.get<std::string>() << "\n";
    std::cout << command << ": " << (r.exit_code == 0 ? "ok" : "failed") << " (exit " << r.exit_code << "), report "
              << (dir / (command + "_report.json")).string() << "\n";
    return r.exit_code;
}

int dispatch(const std::string& command, const Cli& cli) {
    RunOptions opt{cli.out, cli.force, std::max(1u, cli.threads), cli.seed};
    if (command == "verify") {
        GeneratorSet g = GeneratorSet::standard();
        if (cli.tamper) g.alpha[2].block<2, 2>(2, 0) *= -1.0;
        return finish(command, run_verify(g, opt), cli, "");
    }
    ProblemConfig c = load_config(cli.config);
    if (command == "check-ls") return finish(command, run_check_ls(c, opt), cli, c.output_dir);
    if (command == "spectrum") return finish(command, run_spectrum(c, opt), cli, c.output_dir);
    if (command == "dispersion") return finish(command, run_dispersion(c, opt), cli, c.output_dir);
    return finish(command, run_oracle(c, opt), cli, c.output_dir);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dirac delta-shell toolkit: identity checks, LS conditions, essential spectra, 1-D transmission solver"};
    app.set_version_flag("--version", dshell::tool_version);
    app.require_subcommand(1);
    Cli cli;
    app.add_option("--out", cli.out, std::string("output directory (default: $") + dshell::out_dir_env + ", then [output] dir, then ./out)");
    app.add_flag("--force", cli.force, "run spectrum even if the LS gate fails");
    app.add_option("--threads", cli.threads, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", cli.seed, "seed for sample jitter ([solver] jitter = true)");
    // Global flags are accepted after the subcommand too.
    app.fallthrough();

    auto* verify = app.add_subcommand("verify", "algebraic identity suite");
    verify->add_flag("--tamper-alpha2", cli.tamper)->group("");
    for (auto [name, help] : {std::pair{"check-ls", "local, uniform and parameter-dependent LS checks"},
                              std::pair{"spectrum", "essential spectrum with provenance"},
                              std::pair{"dispersion", "gap eigenvalue branches of the limiting shell problem"},
                              std::pair{"oracle", "finite-difference regression battery"}}) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("config", cli.config, "TOML problem description")->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    std::string command = app.get_subcommands().front()->get_name();
    try {
        return dispatch(command, cli);
    } catch (const dshell::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return dshell::exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return dshell::exit_code(dshell::ErrorKind::Solver);
    }
}
