// odyn: command-line front end for the geospatial opinion dynamics engine.
//
//   odyn simulate   --preset paper-core --seed 7 --out runs/s7
//   odyn ensemble   --preset paper-core --seeds 25 --grid p_L,p_R=0,0.5,1
//   odyn gridsearch --gamma 1.1 --gamma 2.0
//
// Exit codes: 0 success (including runs that hit the step cap), 1 config error, 2 I/O error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "odyn/odyn.hpp"

namespace {

constexpr int exit_config_error = 1;
constexpr int exit_io_error = 2;

/// Options shared by every subcommand: where the base config comes from and
/// which scalar keys to override on top of it.
struct CommonOptions {
    std::optional<std::string> config_path;
    std::optional<std::string> preset;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> max_steps;
    std::optional<std::size_t> n;
    std::optional<std::string> lambda_mode;
    std::optional<double> lambda_value, gamma, delta, alpha, b, epsilon, p_L, p_R, sigma, p_willing;
    std::optional<double> stop_threshold;
    std::optional<std::size_t> window;
    bool mega_switching = false;
    bool abs_inside_window = false;
    bool no_mega = false;
    bool unit_weights = false;
    std::vector<std::string> set;
    unsigned threads = 1;

    void attach(CLI::App* app, bool model_scalars = true) {
        app->add_option("--config", config_path, "JSON config or run manifest")->check(CLI::ExistingFile);
        app->add_option("--preset", preset, "built-in parameter bundle")
            ->check(CLI::IsMember(odyn::preset_names()));
        app->add_option("--seed", seed, "master seed");
        app->add_option("--out", out, "output directory");
        app->add_option("--max-steps", max_steps, "hard cap on simulation steps");
        app->add_option("--threads", threads, "worker threads (0 = all cores); results do not depend on it");
        app->add_option("--set", set, "raw override key=JSON, e.g. --set 'n=500'");
        app->add_option("--n", n, "number of agents");
        app->add_option("--lambda-mode", lambda_mode, "absolute | diameter_fraction");
        app->add_option("--lambda", lambda_value, "reference length (or fraction of the domain diameter)");
        if (model_scalars) {
            app->add_option("--gamma", gamma, "weight tail exponent");
            app->add_option("--delta", delta, "distance importance");
            app->add_option("--alpha", alpha, "weight importance");
        }
        app->add_option("--b", b, "confidence bound");
        app->add_option("--epsilon", epsilon, "influencer susceptibility radius");
        app->add_option("--p-L,--p_L", p_L, "left influencer reach");
        app->add_option("--p-R,--p_R", p_R, "right influencer reach");
        app->add_option("--sigma", sigma, "std of the initial opinion mixture");
        app->add_option("--p-willing", p_willing, "weight of the -1 center in a two-center mixture");
        app->add_option("--stop-threshold", stop_threshold, "stopping metric threshold");
        app->add_option("--window", window, "rolling window for the stopping metric");
        app->add_flag("--mega-switching", mega_switching, "lapsed influencer subscribers may switch sides");
        app->add_flag("--abs-inside-window", abs_inside_window, "stopping metric averages |change|");
        app->add_flag("--no-mega", no_mega, "disable the influencer machinery entirely");
        app->add_flag("--unit-weights", unit_weights, "force every influence weight to 1");
    }

    odyn::Json overrides() const {
        odyn::Json j = odyn::Json::object();
        if (seed) j["seed"] = *seed;
        if (out) j["output_dir"] = *out;
        if (max_steps) j["max_steps"] = *max_steps;
        if (n) j["n"] = *n;
        if (lambda_mode) j["lambda_mode"] = *lambda_mode;
        if (lambda_value) j["lambda_value"] = *lambda_value;
        if (gamma) j["gamma"] = *gamma;
        if (delta) j["delta"] = *delta;
        if (alpha) j["alpha"] = *alpha;
        if (b) j["b"] = *b;
        if (epsilon) j["epsilon"] = *epsilon;
        if (p_L) j["p_L"] = *p_L;
        if (p_R) j["p_R"] = *p_R;
        if (sigma) j["belief_init"]["sigma"] = *sigma;
        if (p_willing) j["belief_init"]["probs"] = {*p_willing, 1.0 - *p_willing};
        if (stop_threshold) j["stop_threshold"] = *stop_threshold;
        if (window) j["window"] = *window;
        if (mega_switching) j["mega_switching"] = true;
        if (abs_inside_window) j["abs_inside_window"] = true;
        if (no_mega) j["mega_enabled"] = false;
        if (unit_weights) j["unit_weights"] = true;
        for (const auto& kv : set) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw odyn::ConfigError("set", "expected key=value, got '" + kv + "'");
            const std::string key = kv.substr(0, eq);
            try {
                j[key] = odyn::Json::parse(kv.substr(eq + 1));
            } catch (const nlohmann::json::parse_error&) {
                j[key] = kv.substr(eq + 1);
            }
        }
        return j;
    }

    odyn::RunConfig load() const {
        std::optional<std::filesystem::path> path;
        if (config_path) path = *config_path;
        return odyn::load_config(path, preset, overrides());
    }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geospatial bounded-confidence opinion dynamics with mega-influencers"};
    app.require_subcommand(1);

    CommonOptions sim_opts;
    std::vector<std::size_t> emit_edges;
    bool no_beliefs = false;
    auto* sim = app.add_subcommand("simulate", "run one simulation and write its trajectory");
    sim_opts.attach(sim);
    sim->add_option("--emit-edges", emit_edges, "write the edge list of this step (repeatable)");
    sim->add_flag("--no-beliefs", no_beliefs, "skip the long-format belief CSV");

    CommonOptions ens_opts;
    std::size_t ens_seeds = 25;
    std::vector<std::uint64_t> seed_list;
    std::vector<std::string> grid_specs;
    auto* ens = app.add_subcommand("ensemble", "run seeded ensembles over a parameter grid");
    ens_opts.attach(ens);
    ens->add_option("--seeds", ens_seeds, "number of seeds derived from the master seed");
    ens->add_option("--seed-list", seed_list, "explicit run seeds (overrides --seeds)")->delimiter(',');
    ens->add_option("--grid", grid_specs, "axis 'name[,name]=v1,v2,...' (repeatable; tied names move together)");

    CommonOptions grid_opts;
    std::vector<double> alphas, deltas, gammas;
    std::size_t grid_seeds = 3;
    auto* grid = app.add_subcommand("gridsearch", "initial-graph statistics over (alpha, delta, gamma)");
    grid_opts.attach(grid, false);
    grid->add_option("--alpha", alphas, "alpha values (default 1..10)");
    grid->add_option("--delta", deltas, "delta values (default 1..10)");
    grid->add_option("--gamma", gammas, "gamma values (default 1.5)");
    grid->add_option("--seeds", grid_seeds, "seeds averaged per cell");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config_error;
    }

    try {
        if (*sim) {
            odyn::RunConfig config = sim_opts.load();
            if (!emit_edges.empty()) config.emit_edges = emit_edges;
            if (no_beliefs) config.emit_beliefs = false;
            const auto result = odyn::simulate(config, odyn::resolve_threads(sim_opts.threads));
            std::cout << "status: " << odyn::to_string(result.trajectory.status)
                      << "  stop_step: " << result.trajectory.stop_step
                      << "  final_std: " << result.manifest["final_std"].get<double>() << "\n"
                      << "wrote " << config.output_dir << "\n";
        } else if (*ens) {
            odyn::RunConfig config = ens_opts.load();
            odyn::EnsembleOptions opts;
            opts.seed_count = ens_seeds;
            opts.seed_list = seed_list;
            opts.threads = odyn::resolve_threads(ens_opts.threads);
            for (const auto& g : grid_specs) opts.grid.push_back(odyn::parse_grid_axis(g));
            const auto result = odyn::ensemble(config, opts);
            std::cout << "cells: " << result.summary.cells.size()
                      << "  runs: " << result.manifest["runs"].get<std::size_t>()
                      << "  non-converged: " << result.manifest["non_converged_runs"].get<std::size_t>() << "\n"
                      << "wrote " << config.output_dir << "\n";
        } else if (*grid) {
            odyn::RunConfig config = grid_opts.load();
            odyn::GridSearchOptions opts;
            if (!alphas.empty()) opts.alphas = alphas;
            if (!deltas.empty()) opts.deltas = deltas;
            if (!gammas.empty()) opts.gammas = gammas;
            opts.seed_count = grid_seeds;
            opts.threads = odyn::resolve_threads(grid_opts.threads);
            const auto result = odyn::gridsearch(config, opts);
            std::cout << "rows: " << result.rows.size() << "\nwrote " << config.output_dir << "\n";
        }
    } catch (const odyn::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const odyn::ParameterError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return exit_config_error;
    } catch (const odyn::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return exit_io_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io_error;
    }
    return EXIT_SUCCESS;
}
