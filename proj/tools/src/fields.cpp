#include "fields.h"

#include <cmath>
#include <complex>
#include <vector>

#include "runconfig.h"

namespace bvc::cli {

namespace {

using nlohmann::json;

double numberOr(const json& j, const char* key, double fallback, const std::string& path) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(path + "." + key + ": expected a number");
    return j[key].get<double>();
}

Vector2 vec2Or(const json& j, const char* key, const Vector2& fallback, const std::string& path) {
    if (!j.contains(key)) return fallback;
    const json& v = j[key];
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        throw ConfigError(path + "." + key + ": expected [x, y]");
    return {v[0].get<double>(), v[1].get<double>()};
}

// fields shared by the scalar and boundary variants; segment id unused here
ScalarField makePointField(const json& spec, const std::string& name, const std::string& path) {
    if (name == "constant") {
        double value = numberOr(spec, "value", 0.0, path);
        return [value](const Vector2&) { return value; };
    }
    if (name == "linear") {
        Vector2 a = vec2Or(spec, "a", Vector2::Zero(), path);
        double b = numberOr(spec, "b", 0.0, path);
        return [a, b](const Vector2& p) { return a.dot(p) + b; };
    }
    if (name == "radial") {
        Vector2 center = vec2Or(spec, "center", Vector2::Zero(), path);
        double scale = numberOr(spec, "scale", 1.0, path);
        double power = numberOr(spec, "power", 2.0, path);
        double offset = numberOr(spec, "offset", 0.0, path);
        return [center, scale, power, offset](const Vector2& p) {
            return scale * std::pow((p - center).norm(), power) + offset;
        };
    }
    if (name == "harmonic-poly") {
        int degree = int(numberOr(spec, "degree", 1.0, path));
        if (degree < 0 || degree > 8) throw ConfigError(path + ".degree: expected 0..8");
        double re = numberOr(spec, "re", 1.0, path);
        double im = numberOr(spec, "im", 0.0, path);
        return [degree, re, im](const Vector2& p) {
            std::complex<double> z = std::pow(std::complex<double>(p.x(), p.y()), degree);
            return re * z.real() + im * z.imag();
        };
    }
    if (name == "checkerboard") {
        Vector2 origin = vec2Or(spec, "origin", Vector2::Zero(), path);
        double cell = numberOr(spec, "cell", 0.25, path);
        if (cell <= 0.0) throw ConfigError(path + ".cell: expected > 0");
        double lo = numberOr(spec, "lo", 0.0, path);
        double hi = numberOr(spec, "hi", 1.0, path);
        return [origin, cell, lo, hi](const Vector2& p) {
            long ix = long(std::floor((p.x() - origin.x()) / cell));
            long iy = long(std::floor((p.y() - origin.y()) / cell));
            return ((ix + iy) & 1) == 0 ? lo : hi;
        };
    }
    return {};
}

std::string fieldName(const json& spec, const std::string& path) {
    if (!spec.is_object()) throw ConfigError(path + ": expected an object with a \"name\"");
    if (!spec.contains("name") || !spec["name"].is_string())
        throw ConfigError(path + ".name: expected a string");
    return spec["name"].get<std::string>();
}

} // namespace

ScalarField makeScalarField(const nlohmann::json& spec, const std::string& path) {
    std::string name = fieldName(spec, path);
    if (name == "per-segment-constant")
        throw ConfigError(path + ".name: per-segment-constant needs a boundary segment");
    ScalarField field = makePointField(spec, name, path);
    if (!field) throw ConfigError(path + ".name: unknown field \"" + name + "\"");
    return field;
}

BoundaryField makeBoundaryField(const nlohmann::json& spec, const std::string& path) {
    std::string name = fieldName(spec, path);
    if (name == "per-segment-constant") {
        std::vector<double> values;
        if (spec.contains("values")) {
            if (!spec["values"].is_array())
                throw ConfigError(path + ".values: expected an array of numbers");
            for (const auto& v : spec["values"]) {
                if (!v.is_number()) throw ConfigError(path + ".values: expected an array of numbers");
                values.push_back(v.get<double>());
            }
        }
        double fallback = numberOr(spec, "default", 0.0, path);
        return [values, fallback](const Vector2&, int segment) {
            return segment >= 0 && segment < int(values.size()) ? values[segment] : fallback;
        };
    }
    ScalarField field = makePointField(spec, name, path);
    if (!field) throw ConfigError(path + ".name: unknown field \"" + name + "\"");
    return [field](const Vector2& p, int) { return field(p); };
}

} // namespace bvc::cli
