#pragma once

#include <string>
#include <vector>

#include "bvc/cache.h"
#include "bvc/grid.h"
#include "runconfig.h"

namespace bvc::cli {

struct RoundReport {
    int round = 0;
    long points = 0, fallbackPoints = 0;
    long walks = 0, truncated = 0;          // pointwise walks this round (incl. fallback)
    long cacheWalks = 0, cacheTruncated = 0, resampled = 0;
    double generateSeconds = 0.0, splatSeconds = 0.0, roundSeconds = 0.0;
};

struct SolveOutcome {
    GridField grid;                    // populated in grid mode
    std::vector<Vector2> locations;    // requested points (points mode)
    std::vector<int> pointIndex;       // location -> pts index, -1 outside the domain/region
    std::vector<EvaluationPoint> pts;  // evaluated points
    std::vector<RoundReport> report;
    bool usedGrid = false;
    bool hasSource = false;
};

// full solve per the config; gradients additionally fills the gradient sums
SolveOutcome runSolveInMemory(const RunConfig& cfg, const LoadedProblem& lp,
                              bool gradients = false);

// subcommand drivers; return process exit codes
int runSolve(const RunConfig& cfg);
int runConverge(const RunConfig& cfg, std::vector<int> sweep, int nSeeds, const std::string& out);
int runStreamlines(const RunConfig& cfg);
int runAblate(const RunConfig& cfg, const std::string& parameter, std::vector<double> values,
              int nSeeds, const std::string& out);
int runOracle(const std::string& problemName);

} // namespace bvc::cli
