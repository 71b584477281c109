#include "runconfig.h"

#include <filesystem>
#include <fstream>

#include "bvc/problems.h"
#include "fields.h"

namespace bvc::cli {

namespace {

using nlohmann::json;

double numberField(const json& j, const char* key, double fallback, const std::string& path) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return j[key].get<double>();
}

int intField(const json& j, const char* key, int fallback, const std::string& path) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
    return j[key].get<int>();
}

bool boolField(const json& j, const char* key, bool fallback, const std::string& path) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_boolean()) throw ConfigError(path + "." + key + ": expected a boolean");
    return j[key].get<bool>();
}

std::string stringField(const json& j, const char* key, const std::string& fallback,
                        const std::string& path) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_string()) throw ConfigError(path + "." + key + ": expected a string");
    return j[key].get<std::string>();
}

Vector2 vec2Field(const json& v, const std::string& path) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError(path + ": expected [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
}

void requireObject(const json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
}

SolveMode parseMode(const std::string& s) {
    if (s == "bvc") return SolveMode::Bvc;
    if (s == "wos") return SolveMode::Wos;
    if (s == "wost") return SolveMode::Wost;
    throw ConfigError("mode: expected bvc|wos|wost, got \"" + s + "\"");
}

ClampMode parseClampMode(const std::string& s) {
    if (s == "off") return ClampMode::Off;
    if (s == "clamp-only") return ClampMode::ClampOnly;
    if (s == "clamp+correct") return ClampMode::ClampCorrect;
    throw ConfigError("cache.clampMode: expected off|clamp-only|clamp+correct, got \"" + s + "\"");
}

} // namespace

const char* modeName(SolveMode mode) {
    switch (mode) {
    case SolveMode::Bvc: return "bvc";
    case SolveMode::Wos: return "wos";
    default: return "wost";
    }
}

const char* clampModeName(ClampMode mode) {
    switch (mode) {
    case ClampMode::Off: return "off";
    case ClampMode::ClampOnly: return "clamp-only";
    default: return "clamp+correct";
    }
}

RunConfig parseRunConfig(const json& j) {
    requireObject(j, "config");
    RunConfig cfg;

    if (!j.contains("scene")) throw ConfigError("scene: required");
    const json& sc = j["scene"];
    if (sc.is_string()) {
        cfg.scenePath = sc.get<std::string>();
    } else if (sc.is_object() && sc.contains("analytic") && sc["analytic"].is_string()) {
        cfg.analytic = sc["analytic"].get<std::string>();
    } else {
        throw ConfigError("scene: expected a path string or {\"analytic\": name}");
    }

    if (j.contains("kernel")) {
        const json& k = j["kernel"];
        requireObject(k, "kernel");
        std::string kind = stringField(k, "kind", "poisson", "kernel");
        double sigma = numberField(k, "sigma", 0.0, "kernel");
        if (kind == "poisson") {
            if (sigma != 0.0) throw ConfigError("kernel.sigma: must be 0 for poisson");
            cfg.kernel = KernelSpec::poisson(2);
        } else if (kind == "screened") {
            if (!(sigma > 0.0)) throw ConfigError("kernel.sigma: expected > 0 for screened");
            cfg.kernel = KernelSpec::screened(sigma, 2);
        } else {
            throw ConfigError("kernel.kind: expected poisson|screened, got \"" + kind + "\"");
        }
    }

    if (j.contains("fields")) {
        requireObject(j["fields"], "fields");
        cfg.fields = j["fields"];
        for (const auto& [key, value] : cfg.fields.items()) {
            if (key != "f" && key != "g" && key != "h")
                throw ConfigError("fields." + key + ": expected one of f, g, h");
            // validate the spec eagerly so errors carry the field path
            if (key == "f")
                makeScalarField(value, "fields.f");
            else
                makeBoundaryField(value, "fields." + key);
        }
    }

    cfg.mode = parseMode(stringField(j, "mode", "bvc", "config"));

    if (j.contains("cache")) {
        const json& c = j["cache"];
        requireObject(c, "cache");
        cfg.cache.nBoundary = intField(c, "nBoundary", cfg.cache.nBoundary, "cache");
        cfg.cache.nSource = intField(c, "nSource", cfg.cache.nSource, "cache");
        cfg.cache.nWalksNeumann = intField(c, "nWalksNeumann", cfg.cache.nWalksNeumann, "cache");
        cfg.cache.nWalksDirichlet =
            intField(c, "nWalksDirichlet", cfg.cache.nWalksDirichlet, "cache");
        cfg.cache.offset = numberField(c, "offset", cfg.cache.offset, "cache");
        cfg.cache.clamp = numberField(c, "clamp", cfg.cache.clamp, "cache");
        cfg.cache.clampMode = parseClampMode(stringField(c, "clampMode", "off", "cache"));
        cfg.cache.sourceBall = boolField(c, "sourceBall", cfg.cache.sourceBall, "cache");
        cfg.cache.correctionWalks =
            intField(c, "correctionWalks", cfg.cache.correctionWalks, "cache");
        cfg.cache.voronoi = boolField(c, "voronoi", cfg.cache.voronoi, "cache");
        cfg.cache.stratified = boolField(c, "stratified", cfg.cache.stratified, "cache");
        if (cfg.cache.nBoundary < 1) throw ConfigError("cache.nBoundary: expected >= 1");
        if (cfg.cache.nSource < 0) throw ConfigError("cache.nSource: expected >= 0");
        if (cfg.cache.nWalksNeumann < 1) throw ConfigError("cache.nWalksNeumann: expected >= 1");
        if (cfg.cache.nWalksDirichlet < 1)
            throw ConfigError("cache.nWalksDirichlet: expected >= 1");
        if (cfg.cache.offset < 0.0) throw ConfigError("cache.offset: expected >= 0");
        if (cfg.cache.clamp < 0.0) throw ConfigError("cache.clamp: expected >= 0");
        if (cfg.cache.correctionWalks < 1)
            throw ConfigError("cache.correctionWalks: expected >= 1");
    }

    if (j.contains("walk")) {
        const json& w = j["walk"];
        requireObject(w, "walk");
        cfg.cache.walk.epsilon = numberField(w, "epsilon", cfg.cache.walk.epsilon, "walk");
        cfg.cache.walk.rMin = numberField(w, "rMin", cfg.cache.walk.rMin, "walk");
        cfg.cache.walk.maxSteps = intField(w, "maxSteps", cfg.cache.walk.maxSteps, "walk");
        cfg.cache.walk.nWalks = intField(w, "nWalks", cfg.cache.walk.nWalks, "walk");
        if (cfg.cache.walk.epsilon < 0.0) throw ConfigError("walk.epsilon: expected >= 0");
        if (cfg.cache.walk.rMin < 0.0) throw ConfigError("walk.rMin: expected >= 0");
        if (cfg.cache.walk.maxSteps < 1) throw ConfigError("walk.maxSteps: expected >= 1");
        if (cfg.cache.walk.nWalks < 1) throw ConfigError("walk.nWalks: expected >= 1");
    }

    cfg.rounds = intField(j, "rounds", cfg.rounds, "config");
    if (cfg.rounds < 1) throw ConfigError("rounds: expected >= 1");

    if (j.contains("region")) {
        const json& r = j["region"];
        requireObject(r, "region");
        cfg.regionMode = stringField(r, "mode", "whole", "region");
        cfg.subdomainPath = stringField(r, "path", "", "region");
        if (cfg.regionMode != "whole" && cfg.regionMode != "subdomain")
            throw ConfigError("region.mode: expected whole|subdomain");
        if (cfg.regionMode == "subdomain" && cfg.subdomainPath.empty())
            throw ConfigError("region.path: required for subdomain mode");
    }

    if (j.contains("grid")) {
        const json& g = j["grid"];
        requireObject(g, "grid");
        GridSpec spec;
        if (!g.contains("origin")) throw ConfigError("grid.origin: required");
        spec.origin = vec2Field(g["origin"], "grid.origin");
        spec.spacing = numberField(g, "spacing", 0.0, "grid");
        spec.nx = intField(g, "nx", 0, "grid");
        spec.ny = intField(g, "ny", 0, "grid");
        if (!(spec.spacing > 0.0)) throw ConfigError("grid.spacing: expected > 0");
        if (spec.nx < 1) throw ConfigError("grid.nx: expected >= 1");
        if (spec.ny < 1) throw ConfigError("grid.ny: expected >= 1");
        cfg.grid = spec;
    }
    if (j.contains("points")) {
        if (!j["points"].is_array()) throw ConfigError("points: expected an array of [x, y]");
        int i = 0;
        for (const auto& p : j["points"])
            cfg.points.push_back(vec2Field(p, "points[" + std::to_string(i++) + "]"));
    }
    if (cfg.grid && !cfg.points.empty())
        throw ConfigError("points: cannot be combined with grid");

    if (j.contains("output")) {
        const json& o = j["output"];
        requireObject(o, "output");
        cfg.output.grid = stringField(o, "grid", "", "output");
        cfg.output.image = stringField(o, "image", "", "output");
        cfg.output.report = stringField(o, "report", "", "output");
        if (o.contains("range")) {
            const json& r = o["range"];
            if (!r.is_array() || r.size() != 2 || !r[0].is_number() || !r[1].is_number())
                throw ConfigError("output.range: expected [lo, hi]");
            cfg.output.hasRange = true;
            cfg.output.lo = r[0].get<double>();
            cfg.output.hi = r[1].get<double>();
            if (!(cfg.output.lo < cfg.output.hi))
                throw ConfigError("output.range: expected lo < hi");
        }
    }

    if (j.contains("streamlines")) {
        const json& s = j["streamlines"];
        requireObject(s, "streamlines");
        if (s.contains("seeds")) {
            if (!s["seeds"].is_array())
                throw ConfigError("streamlines.seeds: expected an array of [x, y]");
            int i = 0;
            for (const auto& p : s["seeds"])
                cfg.streamlines.seeds.push_back(
                    vec2Field(p, "streamlines.seeds[" + std::to_string(i++) + "]"));
        }
        cfg.streamlines.step = numberField(s, "step", cfg.streamlines.step, "streamlines");
        cfg.streamlines.steps = intField(s, "steps", cfg.streamlines.steps, "streamlines");
        cfg.streamlines.output = stringField(s, "output", "", "streamlines");
        if (!(cfg.streamlines.step > 0.0)) throw ConfigError("streamlines.step: expected > 0");
        if (cfg.streamlines.steps < 1) throw ConfigError("streamlines.steps: expected >= 1");
    }

    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer() || j["seed"].get<long long>() < 0)
            throw ConfigError("seed: expected a non-negative integer");
        cfg.seed = j["seed"].get<uint64_t>();
    }
    cfg.threads = intField(j, "threads", 0, "config");
    if (cfg.threads < 0) throw ConfigError("threads: expected >= 0");
    return cfg;
}

RunConfig loadRunConfig(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open \"" + path + "\"");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config: " + std::string(e.what()));
    }
    return parseRunConfig(j);
}

nlohmann::json toJson(const RunConfig& cfg) {
    json j;
    if (!cfg.analytic.empty())
        j["scene"] = json{{"analytic", cfg.analytic}};
    else
        j["scene"] = cfg.scenePath;
    j["kernel"] = {{"kind", cfg.kernel.kind == KernelKind::Poisson ? "poisson" : "screened"},
                   {"sigma", cfg.kernel.sigma}};
    j["fields"] = cfg.fields;
    j["mode"] = modeName(cfg.mode);
    j["cache"] = {{"nBoundary", cfg.cache.nBoundary},
                  {"nSource", cfg.cache.nSource},
                  {"nWalksNeumann", cfg.cache.nWalksNeumann},
                  {"nWalksDirichlet", cfg.cache.nWalksDirichlet},
                  {"offset", cfg.cache.offset},
                  {"clamp", cfg.cache.clamp},
                  {"clampMode", clampModeName(cfg.cache.clampMode)},
                  {"sourceBall", cfg.cache.sourceBall},
                  {"correctionWalks", cfg.cache.correctionWalks},
                  {"voronoi", cfg.cache.voronoi},
                  {"stratified", cfg.cache.stratified}};
    j["walk"] = {{"epsilon", cfg.cache.walk.epsilon},
                 {"rMin", cfg.cache.walk.rMin},
                 {"maxSteps", cfg.cache.walk.maxSteps},
                 {"nWalks", cfg.cache.walk.nWalks}};
    j["rounds"] = cfg.rounds;
    j["region"] = {{"mode", cfg.regionMode}, {"path", cfg.subdomainPath}};
    if (cfg.grid)
        j["grid"] = {{"origin", {cfg.grid->origin.x(), cfg.grid->origin.y()}},
                     {"spacing", cfg.grid->spacing},
                     {"nx", cfg.grid->nx},
                     {"ny", cfg.grid->ny}};
    if (!cfg.points.empty()) {
        json pts = json::array();
        for (const auto& p : cfg.points) pts.push_back({p.x(), p.y()});
        j["points"] = pts;
    }
    json out;
    out["grid"] = cfg.output.grid;
    out["image"] = cfg.output.image;
    out["report"] = cfg.output.report;
    if (cfg.output.hasRange) out["range"] = {cfg.output.lo, cfg.output.hi};
    j["output"] = out;
    if (!cfg.streamlines.seeds.empty() || !cfg.streamlines.output.empty()) {
        json seeds = json::array();
        for (const auto& p : cfg.streamlines.seeds) seeds.push_back({p.x(), p.y()});
        j["streamlines"] = {{"seeds", seeds},
                            {"step", cfg.streamlines.step},
                            {"steps", cfg.streamlines.steps},
                            {"output", cfg.streamlines.output}};
    }
    j["seed"] = cfg.seed;
    j["threads"] = cfg.threads;
    return j;
}

LoadedProblem materialize(const RunConfig& cfg) {
    LoadedProblem lp;
    if (!cfg.analytic.empty()) {
        AnalyticProblem ap = analyticProblem(cfg.analytic);
        lp.scene = std::move(ap.scene);
        lp.problem = std::move(ap.problem);
        lp.exactU = std::move(ap.exactU);
        lp.exactGradient = std::move(ap.exactGradient);
        lp.name = ap.name;
    } else {
        if (!std::filesystem::exists(cfg.scenePath))
            throw ConfigError("scene: file not found \"" + cfg.scenePath + "\"");
        lp.scene = loadScene(cfg.scenePath);
        lp.name = cfg.scenePath;
        lp.problem.kernel = cfg.kernel;
        lp.problem.kernel.scale = lp.scene.diagonal;
        if (cfg.fields.contains("f")) lp.problem.f = makeScalarField(cfg.fields["f"], "fields.f");
        if (cfg.fields.contains("g"))
            lp.problem.g = makeBoundaryField(cfg.fields["g"], "fields.g");
        if (cfg.fields.contains("h"))
            lp.problem.h = makeBoundaryField(cfg.fields["h"], "fields.h");
        if (lp.scene.dirichletLength > 0.0 && !lp.problem.g)
            throw ConfigError("fields.g: required, the scene has Dirichlet segments");
    }
    if (cfg.mode == SolveMode::Wos && lp.scene.hasNeumann())
        throw ConfigError("mode: wos requires a pure Dirichlet scene");
    if (cfg.regionMode == "subdomain") {
        if (!std::filesystem::exists(cfg.subdomainPath))
            throw ConfigError("region.path: file not found \"" + cfg.subdomainPath + "\"");
        lp.subdomain = loadScene(cfg.subdomainPath);
    }
    return lp;
}

} // namespace bvc::cli
