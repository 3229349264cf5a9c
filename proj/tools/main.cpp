#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "affinegas/error.hpp"
#include "affinegas/runner.hpp"

namespace fs = std::filesystem;
using namespace affinegas;

namespace {

int finish(const RunResult& r) {
    for (const Claim& c : r.claims) std::printf("%s %s  %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.measured.c_str());
    return r.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Affine gas expansion and Lagrangian perturbation lab"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config, out;
    std::uint64_t seed = 0;
    int threads = 1;
    bool progress = false;
    app.add_option("--config", config, "Scenario JSON file");
    app.add_option("--out", out, "Output directory (default: the scenario's output_dir)");
    auto* seed_opt = app.add_option("--seed", seed, "Seed for randomized fixtures (overrides the config)");
    app.add_option("--threads", threads, "Worker threads for grid kernels")->check(CLI::PositiveNumber);
    app.add_flag("--progress", progress, "Print one line per snapshot to stderr");

    auto* affine = app.add_subcommand("affine", "Integrate the affine ODE and check its asymptotics");
    auto* evolve = app.add_subcommand("evolve", "Evolve a perturbation and compute its diagnostics");
    auto* verify = app.add_subcommand("verify", "Identity suites and Dyson residuals on synthetic fields");
    auto* report = app.add_subcommand("report", "Summarise existing ledgers");
    std::vector<std::string> ledgers;
    report->add_option("ledgers", ledgers, "JSON-lines ledgers");
    for (auto* sub : {affine, evolve, verify}) sub->callback([&] {
        if (config.empty()) throw CLI::RequiredError("--config");
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        set_threads(threads);
        if (report->parsed()) {
            std::vector<fs::path> paths(ledgers.begin(), ledgers.end());
            const RunResult r = emit_report(paths, out.empty() ? fs::path("report") : fs::path(out));
            return finish(r);
        }
        Scenario s = load_scenario(config);
        if (seed_opt->count() > 0) {
            s.seed = seed;
            s.verify.seed = seed;
        }
        RunOptions opt{out.empty() ? fs::path(s.output_dir) : fs::path(out), progress};
        if (affine->parsed()) return finish(run_affine(s, opt));
        if (evolve->parsed()) return finish(run_evolve(s, opt));
        return finish(run_verify(s, opt));
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error (scenario %s): %s\n", config.c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
