#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bvc/scene.h"
#include "runconfig.h"
#include "runner.h"

namespace {

using namespace bvc::cli;

// shared flags applied on top of the config file
struct CommonArgs {
    std::string configPath;
    int threads = -1;
    long long seed = -1;
};

void addCommon(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("-c,--config", args.configPath, "run configuration (JSON)")->required();
    cmd->add_option("--threads", args.threads, "worker cap (default: config, then BVC_THREADS)");
    cmd->add_option("--seed", args.seed, "override the config seed");
}

RunConfig loadWithOverrides(const CommonArgs& args) {
    RunConfig cfg = loadRunConfig(args.configPath);
    if (args.threads >= 0) cfg.threads = args.threads;
    if (args.seed >= 0) cfg.seed = uint64_t(args.seed);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"boundary value caching solver for 2D Poisson problems"};
    app.require_subcommand(1);

    CommonArgs solveArgs, convergeArgs, streamArgs, ablateArgs;
    std::vector<int> sweep;
    int convergeSeeds = 10;
    std::string convergeOut = "converge.csv";
    std::string ablateParam = "l", ablateOut = "ablate.csv";
    std::vector<double> ablateValues;
    int ablateSeeds = 3;
    std::string oracleProblem;

    CLI::App* solve = app.add_subcommand("solve", "run a solve and write grid/image/report");
    addCommon(solve, solveArgs);

    CLI::App* converge = app.add_subcommand("converge", "error vs cache size or walk count");
    addCommon(converge, convergeArgs);
    converge->add_option("--list", sweep, "sweep values (cache size N in bvc mode, walks otherwise)")
        ->required();
    converge->add_option("--seeds", convergeSeeds, "independent seeds per setting");
    converge->add_option("--out", convergeOut, "output CSV path");

    CLI::App* stream = app.add_subcommand("streamlines", "trace gradient streamlines from caches");
    addCommon(stream, streamArgs);

    CLI::App* ablate = app.add_subcommand("ablate", "sweep offset l, clamp c, or correction mode");
    addCommon(ablate, ablateArgs);
    ablate->add_option("--parameter", ablateParam, "l | c | mode");
    ablate->add_option("--values", ablateValues,
                       "sweep values (epsilon multiples for l, absolute for c, 0..2 for mode)");
    ablate->add_option("--seeds", ablateSeeds, "independent seeds per setting");
    ablate->add_option("--out", ablateOut, "output CSV path");

    CLI::App* oracle = app.add_subcommand("oracle", "run reference-solution checks");
    oracle->add_option("--problem", oracleProblem, "analytic problem name")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2; // config/usage error
    }

    try {
        if (solve->parsed()) return runSolve(loadWithOverrides(solveArgs));
        if (converge->parsed())
            return runConverge(loadWithOverrides(convergeArgs), sweep, convergeSeeds, convergeOut);
        if (stream->parsed()) return runStreamlines(loadWithOverrides(streamArgs));
        if (ablate->parsed())
            return runAblate(loadWithOverrides(ablateArgs), ablateParam, ablateValues, ablateSeeds,
                             ablateOut);
        if (oracle->parsed()) return runOracle(oracleProblem);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const bvc::ParseError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 2;
}
