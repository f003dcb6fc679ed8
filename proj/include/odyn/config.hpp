#ifndef ODYN_CONFIG_HPP
#define ODYN_CONFIG_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "odyn/dynamics.hpp"
#include "odyn/errors.hpp"
#include "odyn/spatial.hpp"

namespace odyn {

using Json = nlohmann::ordered_json;

enum class LambdaMode { absolute, diameter_fraction };

constexpr std::string_view to_string(LambdaMode m) noexcept {
    return m == LambdaMode::absolute ? "absolute" : "diameter_fraction";
}

/// Domain as written in a config: six coordinates per triangle, optional rates.
struct DomainSpec {
    std::vector<std::array<double, 6>> triangles{{0.0, 0.0, 1.0, 0.0, 0.5, 0.8660254037844386}};
    std::vector<double> rates; ///< empty: all zero (only valid with fixed n)

    Domain to_domain() const {
        std::vector<Triangle> tris;
        for (const auto& t : triangles) tris.emplace_back(Point2{t[0], t[1]}, Point2{t[2], t[3]}, Point2{t[4], t[5]});
        std::vector<double> r = rates.empty() ? std::vector<double>(tris.size(), 0.0) : rates;
        return Domain(std::move(tris), std::move(r));
    }
};

/// Fully resolved run configuration. Defaults equal the `paper-core` preset.
struct RunConfig {
    std::optional<std::size_t> n = 1000;
    LambdaMode lambda_mode = LambdaMode::diameter_fraction;
    double lambda_value = 0.1;
    double gamma = 1.5;
    double delta = 8.0;
    double alpha = 2.0;
    double b = 1.5;
    double epsilon = 1.5;
    double p_L = 0.0;
    double p_R = 0.0;
    bool mega_enabled = true;
    bool mega_switching = false;
    bool abs_inside_window = false;
    bool unit_weights = false;
    std::size_t max_steps = 200;
    double stop_threshold = 0.01;
    std::size_t window = 5;
    DomainSpec domain{};
    BeliefInit belief_init{};
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    std::vector<std::size_t> emit_edges;
    bool emit_beliefs = true;
};

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names{"paper-core", "paper-vaccine"};
    return names;
}

/// Built-in parameter bundles: the reference network on an equilateral
/// triangle, and the same network seeded 69/31 with asymmetric influencer reach.
inline RunConfig preset(std::string_view name) {
    RunConfig c;
    if (name == "paper-core") return c;
    if (name == "paper-vaccine") {
        c.belief_init.probs = {0.69, 0.31};
        c.p_L = 0.35;
        c.p_R = 0.75;
        return c;
    }
    throw ConfigError("preset", "unknown preset '" + std::string(name) + "'");
}

inline double effective_lambda(const RunConfig& c) {
    return c.lambda_mode == LambdaMode::absolute ? c.lambda_value : c.lambda_value * domain_diameter(c.domain.to_domain());
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace detail {

inline void require(bool ok, std::string_view key, const std::string& what) {
    if (!ok) throw ConfigError(std::string(key), what);
}

} // namespace detail

/// Re-checks every constraint of the owning modules, naming the key at fault.
inline void validate(const RunConfig& c) {
    using detail::require;
    require(!c.n || *c.n >= 1, "n", "must be >= 1");
    require(c.lambda_value > 0.0 && std::isfinite(c.lambda_value), "lambda_value", "must be finite and > 0");
    require(c.gamma > 0.0 && std::isfinite(c.gamma), "gamma", "must be finite and > 0");
    require(c.delta >= 0.0 && std::isfinite(c.delta), "delta", "must be finite and >= 0");
    require(c.alpha >= 0.0 && std::isfinite(c.alpha), "alpha", "must be finite and >= 0");
    require(c.b > 0.0, "b", "must be > 0");
    require(c.epsilon > 0.0, "epsilon", "must be > 0");
    require(c.p_L >= 0.0 && c.p_L <= 1.0, "p_L", "must lie in [0, 1]");
    require(c.p_R >= 0.0 && c.p_R <= 1.0, "p_R", "must lie in [0, 1]");
    require(c.max_steps >= 1, "max_steps", "must be >= 1");
    require(c.stop_threshold >= 0.0, "stop_threshold", "must be >= 0");
    require(c.window >= 1, "window", "must be >= 1");
    require(!c.output_dir.empty(), "output_dir", "must not be empty");

    require(!c.domain.triangles.empty(), "domain.triangles", "needs at least one triangle");
    require(c.domain.rates.empty() || c.domain.rates.size() == c.domain.triangles.size(), "domain.rates",
            "needs one rate per triangle");
    for (double r : c.domain.rates) require(r >= 0.0 && std::isfinite(r), "domain.rates", "rates must be >= 0");
    try {
        (void)c.domain.to_domain();
    } catch (const ParameterError& e) {
        throw ConfigError("domain.triangles", e.what());
    }
    require(!c.n || c.domain.triangles.size() == 1, "n", "a fixed agent count requires a single-triangle domain");
    require(c.n || !c.domain.rates.empty(), "domain.rates", "required when n is null (Poisson placement)");

    try {
        c.belief_init.validate();
    } catch (const ParameterError& e) {
        throw ConfigError("belief_init", e.what());
    }
}

inline ModelParams to_model_params(const RunConfig& c) {
    validate(c);
    ModelParams p;
    p.domain = c.domain.to_domain();
    p.n = c.n;
    p.gamma = c.gamma;
    p.unit_weights = c.unit_weights;
    p.connection = ConnectionParams{effective_lambda(c), c.delta, c.alpha, c.b};
    p.beliefs = c.belief_init;
    p.mega = MegaConfig{c.p_L, c.p_R, c.epsilon, c.mega_enabled, c.mega_switching};
    p.stop = StopRule{c.stop_threshold, c.window, c.max_steps, c.abs_inside_window};
    p.validate();
    return p;
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

inline Json to_json(const RunConfig& c) {
    Json j;
    j["n"] = c.n ? Json(*c.n) : Json(nullptr);
    j["lambda_mode"] = std::string(to_string(c.lambda_mode));
    j["lambda_value"] = c.lambda_value;
    j["gamma"] = c.gamma;
    j["delta"] = c.delta;
    j["alpha"] = c.alpha;
    j["b"] = c.b;
    j["epsilon"] = c.epsilon;
    j["p_L"] = c.p_L;
    j["p_R"] = c.p_R;
    j["mega_enabled"] = c.mega_enabled;
    j["mega_switching"] = c.mega_switching;
    j["abs_inside_window"] = c.abs_inside_window;
    j["unit_weights"] = c.unit_weights;
    j["max_steps"] = c.max_steps;
    j["stop_threshold"] = c.stop_threshold;
    j["window"] = c.window;
    Json tris = Json::array();
    for (const auto& t : c.domain.triangles) tris.push_back(t);
    j["domain"] = {{"triangles", tris}, {"rates", c.domain.rates}};
    j["belief_init"] = {{"centers", c.belief_init.centers},
                        {"probs", c.belief_init.probs},
                        {"sigma", c.belief_init.sigma}};
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["emit_edges"] = c.emit_edges;
    j["emit_beliefs"] = c.emit_beliefs;
    return j;
}

namespace detail {

template <class T>
T read_as(const Json& v, std::string_view key) {
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(std::string(key), "has the wrong type");
    }
}

inline double read_number(const Json& v, std::string_view key) {
    if (!v.is_number()) throw ConfigError(std::string(key), "must be a number");
    return v.get<double>();
}

inline std::size_t read_count(const Json& v, std::string_view key) {
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return v.get<std::size_t>();
    if (v.is_number_float() && v.get<double>() >= 0 && v.get<double>() == std::floor(v.get<double>()))
        return static_cast<std::size_t>(v.get<double>());
    throw ConfigError(std::string(key), "must be a non-negative integer");
}

inline bool read_bool(const Json& v, std::string_view key) {
    if (!v.is_boolean()) throw ConfigError(std::string(key), "must be true or false");
    return v.get<bool>();
}

inline void reject_unknown(const Json& obj, std::initializer_list<std::string_view> known, std::string_view prefix) {
    for (const auto& [k, _] : obj.items()) {
        bool ok = false;
        for (auto name : known) ok = ok || k == name;
        if (!ok) throw ConfigError(std::string(prefix) + k, "unknown key");
    }
}

} // namespace detail

/// Overlay the keys present in `j` onto `c`. Unknown keys are rejected.
inline void apply_json(RunConfig& c, const Json& j) {
    using namespace detail;
    if (!j.is_object()) throw ConfigError("", "configuration must be a JSON object");
    reject_unknown(j,
                   {"preset", "n", "lambda_mode", "lambda_value", "gamma", "delta", "alpha", "b", "epsilon", "p_L",
                    "p_R", "mega_enabled", "mega_switching", "abs_inside_window", "unit_weights", "max_steps",
                    "stop_threshold", "window", "domain", "belief_init", "seed", "output_dir", "emit_edges",
                    "emit_beliefs"},
                   "");
    for (const auto& [key, v] : j.items()) {
        if (key == "preset") continue;
        else if (key == "n") c.n = v.is_null() ? std::nullopt : std::optional<std::size_t>(read_count(v, key));
        else if (key == "lambda_mode") {
            const auto s = read_as<std::string>(v, key);
            if (s == "absolute") c.lambda_mode = LambdaMode::absolute;
            else if (s == "diameter_fraction") c.lambda_mode = LambdaMode::diameter_fraction;
            else throw ConfigError(key, "must be 'absolute' or 'diameter_fraction'");
        } else if (key == "lambda_value") c.lambda_value = read_number(v, key);
        else if (key == "gamma") c.gamma = read_number(v, key);
        else if (key == "delta") c.delta = read_number(v, key);
        else if (key == "alpha") c.alpha = read_number(v, key);
        else if (key == "b") c.b = read_number(v, key);
        else if (key == "epsilon") c.epsilon = read_number(v, key);
        else if (key == "p_L") c.p_L = read_number(v, key);
        else if (key == "p_R") c.p_R = read_number(v, key);
        else if (key == "mega_enabled") c.mega_enabled = read_bool(v, key);
        else if (key == "mega_switching") c.mega_switching = read_bool(v, key);
        else if (key == "abs_inside_window") c.abs_inside_window = read_bool(v, key);
        else if (key == "unit_weights") c.unit_weights = read_bool(v, key);
        else if (key == "max_steps") c.max_steps = read_count(v, key);
        else if (key == "stop_threshold") c.stop_threshold = read_number(v, key);
        else if (key == "window") c.window = read_count(v, key);
        else if (key == "seed") c.seed = read_as<std::uint64_t>(v, key);
        else if (key == "output_dir") c.output_dir = read_as<std::string>(v, key);
        else if (key == "emit_beliefs") c.emit_beliefs = read_bool(v, key);
        else if (key == "emit_edges") {
            if (!v.is_array()) throw ConfigError(key, "must be an array of step indices");
            c.emit_edges.clear();
            for (const auto& s : v) c.emit_edges.push_back(read_count(s, key));
        } else if (key == "domain") {
            if (!v.is_object()) throw ConfigError(key, "must be an object");
            reject_unknown(v, {"triangles", "rates"}, "domain.");
            if (v.contains("triangles")) {
                const auto& tris = v["triangles"];
                if (!tris.is_array()) throw ConfigError("domain.triangles", "must be an array");
                c.domain.triangles.clear();
                for (const auto& t : tris) {
                    if (!t.is_array() || t.size() != 6)
                        throw ConfigError("domain.triangles", "each triangle needs exactly 6 numbers");
                    std::array<double, 6> xs{};
                    for (std::size_t i = 0; i < 6; ++i) xs[i] = read_number(t[i], "domain.triangles");
                    c.domain.triangles.push_back(xs);
                }
            }
            if (v.contains("rates")) {
                const auto& r = v["rates"];
                if (!r.is_array()) throw ConfigError("domain.rates", "must be an array");
                c.domain.rates.clear();
                for (const auto& x : r) c.domain.rates.push_back(read_number(x, "domain.rates"));
            }
        } else if (key == "belief_init") {
            if (!v.is_object()) throw ConfigError(key, "must be an object");
            reject_unknown(v, {"centers", "probs", "sigma"}, "belief_init.");
            auto read_list = [&](const char* name) {
                std::vector<double> out;
                const std::string k = std::string("belief_init.") + name;
                if (!v[name].is_array()) throw ConfigError(k, "must be an array");
                for (const auto& x : v[name]) out.push_back(read_number(x, k));
                return out;
            };
            if (v.contains("centers")) c.belief_init.centers = read_list("centers");
            if (v.contains("probs")) c.belief_init.probs = read_list("probs");
            if (v.contains("sigma")) c.belief_init.sigma = read_number(v["sigma"], "belief_init.sigma");
        }
    }
}

/// Build a config from JSON: an optional "preset" key picks the starting
/// bundle, other keys override it. A run manifest is accepted as well; its
/// embedded resolved config is used.
inline RunConfig config_from_json(const Json& j) {
    if (j.is_object() && j.contains("manifest_version")) {
        if (!j.contains("config")) throw ConfigError("config", "manifest has no embedded config");
        return config_from_json(j["config"]);
    }
    RunConfig c;
    if (j.is_object() && j.contains("preset")) c = preset(detail::read_as<std::string>(j["preset"], "preset"));
    apply_json(c, j);
    validate(c);
    return c;
}

inline Json parse_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("", "parse error in " + path.string() + ": " + e.what());
    }
}

inline RunConfig load_config(const std::filesystem::path& path) { return config_from_json(parse_json_file(path)); }

/// Base config (file or preset or defaults) followed by inline overrides.
inline RunConfig load_config(const std::optional<std::filesystem::path>& path, const std::optional<std::string>& preset_name,
                             const Json& overrides) {
    RunConfig c;
    if (path) c = load_config(*path);
    else if (preset_name) c = preset(*preset_name);
    if (path && preset_name) {
        RunConfig from_preset = preset(*preset_name);
        Json file_json = parse_json_file(*path);
        if (file_json.contains("manifest_version")) file_json = file_json["config"];
        apply_json(from_preset, file_json);
        c = from_preset;
    }
    if (!overrides.is_null()) apply_json(c, overrides);
    validate(c);
    return c;
}

} // namespace odyn

#endif // ODYN_CONFIG_HPP
