#ifndef ODYN_COMMANDS_HPP
#define ODYN_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "odyn/config.hpp"
#include "odyn/dynamics.hpp"
#include "odyn/errors.hpp"
#include "odyn/experiment.hpp"
#include "odyn/output.hpp"

namespace odyn {

inline constexpr int manifest_version = 1;

/// Writes named artifacts into one directory and remembers their checksums.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) { ensure_directory(dir_); }

    void write(const std::string& name, const std::string& content) {
        write_text(dir_ / name, content);
        artifacts_[name] = {{"bytes", content.size()}, {"crc32", crc32_hex(content)}};
    }

    const Json& artifacts() const noexcept { return artifacts_; }
    const std::filesystem::path& dir() const noexcept { return dir_; }

    void write_manifest(Json manifest) {
        manifest["artifacts"] = artifacts_;
        write_text(dir_ / "manifest.json", manifest.dump(2) + "\n");
    }

private:
    std::filesystem::path dir_;
    Json artifacts_ = Json::object();
};

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateResult {
    Trajectory trajectory;
    Json manifest;
};

inline SimulateResult simulate(const RunConfig& config, unsigned threads = 1) {
    const ModelParams params = to_model_params(config);
    RunOptions opts;
    opts.threads = threads;
    opts.capture_steps.insert(config.emit_edges.begin(), config.emit_edges.end());
    Trajectory traj = run_simulation(params, config.seed, opts);

    ArtifactWriter out(config.output_dir);
    if (config.emit_beliefs) out.write("trajectory_beliefs.csv", beliefs_csv(traj));
    out.write("trajectory_summary.csv", summary_csv(traj));
    out.write("agents.csv", agents_csv(traj));
    Json skipped = Json::array();
    for (std::size_t step : config.emit_edges) {
        auto it = traj.captured.find(step);
        if (it == traj.captured.end()) {
            skipped.push_back(step);
            continue;
        }
        out.write("edges_step_" + std::to_string(step) + ".csv", edges_csv(it->second));
    }

    Json manifest;
    manifest["manifest_version"] = manifest_version;
    manifest["command"] = "simulate";
    manifest["config"] = to_json(config);
    manifest["seed"] = config.seed;
    manifest["effective_lambda"] = params.connection.lambda;
    manifest["agents"] = traj.agent_count();
    manifest["status"] = std::string(to_string(traj.status));
    manifest["converged"] = traj.converged();
    manifest["stop_step"] = traj.stop_step;
    manifest["final_std"] = population_std(traj.final_beliefs());
    manifest["edges_not_emitted"] = skipped;
    out.write_manifest(manifest);
    return {std::move(traj), std::move(manifest)};
}

// ---------------------------------------------------------------------------
// ensemble
// ---------------------------------------------------------------------------

/// Parse "name[,name...]=v1,v2,..." into a grid axis.
inline GridAxis parse_grid_axis(std::string_view text) {
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ConfigError("grid", "expected name=v1,v2,... in '" + std::string(text) + "'");
    auto split = [](std::string_view s) {
        std::vector<std::string> parts;
        std::size_t start = 0;
        while (start <= s.size()) {
            const auto comma = s.find(',', start);
            const auto end = comma == std::string_view::npos ? s.size() : comma;
            parts.emplace_back(s.substr(start, end - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        return parts;
    };
    GridAxis axis;
    axis.names = split(text.substr(0, eq));
    for (const auto& name : axis.names)
        if (!is_grid_parameter(name)) throw ConfigError("grid", "unknown grid parameter '" + name + "'");
    for (const auto& v : split(text.substr(eq + 1))) {
        try {
            axis.values.push_back(parse_double(v));
        } catch (const IoError&) {
            throw ConfigError("grid", "bad value '" + v + "'");
        }
        if (std::isnan(axis.values.back())) throw ConfigError("grid", "empty value in '" + std::string(text) + "'");
    }
    return axis;
}

struct EnsembleOptions {
    std::size_t seed_count = 25;
    std::vector<std::uint64_t> seed_list; ///< overrides seed_count when non-empty
    std::vector<GridAxis> grid;
    unsigned threads = 1;
};

inline std::vector<std::uint64_t> ensemble_seeds(const RunConfig& config, const EnsembleOptions& opts) {
    if (!opts.seed_list.empty()) return opts.seed_list;
    if (opts.seed_count == 0) throw ConfigError("seeds", "must be >= 1");
    return derive_seeds(config.seed, opts.seed_count);
}

struct EnsembleResult {
    EnsembleSummary summary;
    Json transitions;
    Json manifest;
};

inline EnsembleResult ensemble(const RunConfig& config, const EnsembleOptions& opts) {
    EnsembleSpec spec{to_model_params(config), ensemble_seeds(config, opts), opts.grid};
    EnsembleSummary summary;
    try {
        summary = run_ensemble(spec, opts.threads);
    } catch (const ParameterError& e) {
        throw ConfigError("grid", e.what());
    }

    ArtifactWriter out(config.output_dir);
    out.write("ensemble.csv", ensemble_csv(summary));
    Json transitions = transitions_json(summary);
    out.write("transitions.json", transitions.dump(2) + "\n");

    Json grid = Json::array();
    for (const auto& axis : opts.grid) grid.push_back({{"names", axis.names}, {"values", axis.values}});
    std::size_t non_converged = 0;
    for (const auto& cs : summary.cells)
        for (const auto& r : cs.runs) non_converged += !r.converged();
    Json manifest;
    manifest["manifest_version"] = manifest_version;
    manifest["command"] = "ensemble";
    manifest["config"] = to_json(config);
    manifest["seeds"] = spec.seeds;
    manifest["grid"] = grid;
    manifest["cells"] = summary.cells.size();
    manifest["runs"] = summary.cells.size() * spec.seeds.size();
    manifest["non_converged_runs"] = non_converged;
    out.write_manifest(manifest);
    return {std::move(summary), std::move(transitions), std::move(manifest)};
}

// ---------------------------------------------------------------------------
// gridsearch
// ---------------------------------------------------------------------------

struct GridSearchOptions {
    std::vector<double> alphas{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<double> deltas{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    std::vector<double> gammas{1.5};
    std::size_t seed_count = 3;
    unsigned threads = 1;
};

struct GridSearchResult {
    std::vector<GridStatsRow> rows;
    Json manifest;
};

inline GridSearchResult gridsearch(const RunConfig& config, const GridSearchOptions& opts) {
    for (double a : opts.alphas)
        if (!(a >= 0.0)) throw ConfigError("alpha", "must be >= 0");
    for (double d : opts.deltas)
        if (!(d >= 0.0)) throw ConfigError("delta", "must be >= 0");
    for (double g : opts.gammas)
        if (!(g > 0.0)) throw ConfigError("gamma", "must be > 0");
    if (opts.seed_count == 0) throw ConfigError("seeds", "must be >= 1");

    GridSearchSpec spec{to_model_params(config), opts.alphas, opts.deltas, opts.gammas,
                        derive_seeds(config.seed, opts.seed_count)};
    auto rows = grid_search_stats(spec, opts.threads);

    ArtifactWriter out(config.output_dir);
    out.write("gridsearch.csv", gridsearch_csv(rows));
    Json manifest;
    manifest["manifest_version"] = manifest_version;
    manifest["command"] = "gridsearch";
    manifest["config"] = to_json(config);
    manifest["seeds"] = spec.seeds;
    manifest["alphas"] = opts.alphas;
    manifest["deltas"] = opts.deltas;
    manifest["gammas"] = opts.gammas;
    out.write_manifest(manifest);
    return {std::move(rows), std::move(manifest)};
}

} // namespace odyn

#endif // ODYN_COMMANDS_HPP
