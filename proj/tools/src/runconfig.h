#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bvc/cache.h"
#include "bvc/pointwise.h"
#include "bvc/scene.h"
#include "json.hpp"

namespace bvc::cli {

// validation failure; message starts with the offending field path
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class SolveMode { Bvc, Wos, Wost };

struct GridSpec {
    Vector2 origin = Vector2::Zero();
    double spacing = 0.0;
    int nx = 0, ny = 0;
};

struct OutputSpec {
    std::string grid, image, report;
    bool hasRange = false; // fixed image value range instead of data min/max
    double lo = 0.0, hi = 0.0;
};

struct StreamlineSpec {
    std::vector<Vector2> seeds;
    double step = 0.1;
    int steps = 32;
    std::string output;
};

struct RunConfig {
    std::string scenePath;   // boundary file; empty when analytic is set
    std::string analytic;    // registry problem name
    KernelSpec kernel = KernelSpec::poisson(2);
    nlohmann::json fields = nlohmann::json::object(); // raw f/g/h specs
    SolveMode mode = SolveMode::Bvc;
    CacheConfig cache;       // walk block lives in cache.walk
    int rounds = 1;
    std::string regionMode = "whole"; // whole | subdomain
    std::string subdomainPath;
    std::optional<GridSpec> grid;
    std::vector<Vector2> points; // explicit evaluation points instead of a grid
    OutputSpec output;
    StreamlineSpec streamlines;
    uint64_t seed = 0;
    int threads = 0;
};

RunConfig parseRunConfig(const nlohmann::json& j);
RunConfig loadRunConfig(const std::string& path);
nlohmann::json toJson(const RunConfig& cfg);

// scene + problem + optional analytic reference fields, ready to solve
struct LoadedProblem {
    Scene scene;
    PdeProblem problem;
    std::function<double(const Vector2&)> exactU;          // null unless analytic
    std::function<Vector2(const Vector2&)> exactGradient;  // null unless analytic
    std::optional<Scene> subdomain;
    std::string name;
};

LoadedProblem materialize(const RunConfig& cfg);

const char* modeName(SolveMode mode);
const char* clampModeName(ClampMode mode);

} // namespace bvc::cli
