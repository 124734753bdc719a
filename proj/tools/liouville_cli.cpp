#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "liouville/config.hpp"
#include "liouville/run.hpp"

using namespace liouville;

int main(int argc, char** argv) {
    CLI::App app{"Build and verify blow-up profiles of the singular Liouville equation."};
    std::string command;
    std::string config_path;
    std::optional<double> alpha, tol, tau;
    std::optional<int> n, grid_m, l_max;
    std::vector<double> eps;
    std::optional<std::string> out;
    std::vector<std::string> formats;

    app.add_option("command", command, "build, verify or sweep")
        ->required()
        ->check(CLI::IsMember({"build", "verify", "sweep"}));
    app.add_option("--config", config_path, "JSON configuration file");
    auto* a_opt = app.add_option("--alpha", alpha, "non-integer singular exponent");
    auto* n_opt = app.add_option("--n", n, "integer singular exponent (quantized pipeline)");
    a_opt->excludes(n_opt);
    app.add_option("--eps", eps, "comma-separated, strictly decreasing scales")->delimiter(',');
    app.add_option("--grid-m", grid_m, "radial grid size");
    app.add_option("--l-max", l_max, "highest angular mode");
    app.add_option("--tol", tol, "iteration tolerance");
    app.add_option("--tau", tau, "domain factor of the quantized pipeline");
    app.add_option("--out", out, "output directory");
    app.add_option("--format", formats, "csv,json")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitConfig;
    }

    json overrides = json::object();
    if (alpha) {
        overrides["pipeline"] = "nonquantized";
        overrides["alpha"] = *alpha;
    }
    if (n) {
        overrides["pipeline"] = "quantized";
        overrides["n"] = *n;
    }
    if (!eps.empty()) overrides["eps"] = eps;
    if (grid_m) overrides["grid_m"] = *grid_m;
    if (l_max) overrides["l_max"] = *l_max;
    if (tol) overrides["tol"] = *tol;
    if (tau) overrides["tau"] = *tau;
    if (out) overrides["out"] = *out;
    if (!formats.empty()) overrides["format"] = formats;

    RunConfig config;
    try {
        config = parse_config(config_path, overrides);
    } catch (const Error& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }

    const Command cmd = command == "build" ? Command::build : command == "verify" ? Command::verify : Command::sweep;
    const ResultBundle bundle = run(config, cmd);
    try {
        for (const auto& path : export_bundle(bundle)) std::cout << "wrote " << path << "\n";
    } catch (const IoError& e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    }
    for (const auto& f : bundle.flags)
        std::cout << (f.pass() ? "PASS " : "FAIL ") << f.name << " " << fmt17(f.value) << "\n";
    if (bundle.failure) std::cerr << "failure: " << bundle.failure->dump() << "\n";
    return bundle.exit_code;
}
