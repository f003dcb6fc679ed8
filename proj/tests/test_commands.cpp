#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>
#include <sys/wait.h>

#include "odyn/odyn.hpp"

using namespace odyn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "odyn_test_commands" / name;
    fs::remove_all(p);
    return p;
}

RunConfig small_config(const fs::path& out, std::size_t n = 200) {
    RunConfig c = preset("paper-core");
    c.n = n;
    c.seed = 7;
    c.output_dir = out.string();
    return c;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_text(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        rows.push_back(std::move(fields));
    }
    return rows;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(ODYN_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("simulate writes the trajectory and a manifest", "[commands][simulate]") {
    const auto dir = scratch("sim");
    RunConfig c = small_config(dir);
    c.emit_edges = {0, 999};
    const auto res = simulate(c);

    for (const char* f : {"trajectory_beliefs.csv", "trajectory_summary.csv", "agents.csv", "edges_step_0.csv",
                          "manifest.json"})
        REQUIRE(fs::exists(dir / f));
    REQUIRE_FALSE(fs::exists(dir / "edges_step_1.csv"));

    const Json m = Json::parse(read_text(dir / "manifest.json"));
    REQUIRE(m["seed"] == 7);
    REQUIRE(m["agents"] == 200);
    REQUIRE(m["edges_not_emitted"] == Json::array({999}));
    REQUIRE(m["artifacts"].contains("agents.csv"));
    REQUIRE(m["artifacts"]["agents.csv"]["crc32"] == crc32_hex(read_text(dir / "agents.csv")));

    const auto edges = read_csv(dir / "edges_step_0.csv");
    REQUIRE(edges.size() - 1 == res.trajectory.captured.at(0).edge_count());
}

TEST_CASE("simulate is byte-identical on re-run", "[commands][simulate]") {
    const auto a = scratch("rerun_a"), b = scratch("rerun_b");
    RunConfig ca = small_config(a), cb = small_config(b);
    simulate(ca, 1);
    simulate(cb, 3);
    for (const char* f : {"trajectory_beliefs.csv", "trajectory_summary.csv", "agents.csv"})
        REQUIRE(read_text(a / f) == read_text(b / f));
    Json ma = Json::parse(read_text(a / "manifest.json")), mb = Json::parse(read_text(b / "manifest.json"));
    ma["config"].erase("output_dir");
    mb["config"].erase("output_dir");
    REQUIRE(ma == mb);
}

TEST_CASE("step cap is recorded in the manifest", "[commands][simulate]") {
    const auto dir = scratch("cap");
    RunConfig c = small_config(dir);
    c.max_steps = 1;
    simulate(c);
    const Json m = Json::parse(read_text(dir / "manifest.json"));
    REQUIRE(m["status"] == "max steps reached");
    REQUIRE(m["converged"] == false);
    REQUIRE(m["stop_step"] == 1);
}

TEST_CASE("CSV output parses back losslessly", "[commands][simulate]") {
    const auto dir = scratch("roundtrip");
    const auto res = simulate(small_config(dir));
    const auto& traj = res.trajectory;

    const auto beliefs = read_csv(dir / "trajectory_beliefs.csv");
    REQUIRE(beliefs.size() == 1 + traj.beliefs.size() * traj.agent_count());
    for (std::size_t i = 1; i < beliefs.size(); ++i) {
        const auto t = std::stoul(beliefs[i][0]), u = std::stoul(beliefs[i][1]);
        REQUIRE(parse_double(beliefs[i][2]) == traj.beliefs[t][u]);
    }
    const auto agents = read_csv(dir / "agents.csv");
    for (std::size_t u = 0; u < traj.agent_count(); ++u) {
        REQUIRE(parse_double(agents[u + 1][1]) == traj.positions[u].x);
        REQUIRE(parse_double(agents[u + 1][2]) == traj.positions[u].y);
        REQUIRE(parse_double(agents[u + 1][3]) == traj.weights[u]);
    }
    const auto summary = read_csv(dir / "trajectory_summary.csv");
    REQUIRE(summary[1][3].empty());
    for (std::size_t t = 1; t < traj.beliefs.size(); ++t) {
        REQUIRE(parse_double(summary[t + 1][1]) == traj.mean_in_degree[t]);
        REQUIRE(parse_double(summary[t + 1][3]) == traj.stopping_metric[t]);
    }
}

TEST_CASE("a manifest reproduces its run", "[commands][simulate]") {
    const auto a = scratch("manifest_a"), b = scratch("manifest_b");
    RunConfig c = small_config(a);
    c.p_L = 0.4;
    c.emit_edges = {2};
    simulate(c);
    RunConfig again = load_config(a / "manifest.json");
    again.output_dir = b.string();
    simulate(again);
    for (const char* f : {"trajectory_beliefs.csv", "agents.csv", "edges_step_2.csv"})
        REQUIRE(read_text(a / f) == read_text(b / f));
}

TEST_CASE("ensemble rows and transition report", "[commands][ensemble]") {
    const auto dir = scratch("ens");
    RunConfig c = small_config(dir, 80);
    EnsembleOptions opts;
    opts.grid.push_back(parse_grid_axis("p_L,p_R=0,0.5,1"));
    opts.threads = 2;
    const auto res = ensemble(c, opts);

    const auto rows = read_csv(dir / "ensemble.csv");
    REQUIRE(rows.size() == 1 + 75);
    REQUIRE(rows[0] == std::vector<std::string>{"cell_id", "p_L", "p_R", "seed", "final_std", "stop_step",
                                                "mean_in_degree", "mean_clustering", "ww", "wh", "hw", "hh",
                                                "converged"});
    REQUIRE(rows[26][0] == "1");
    REQUIRE(rows[26][1] == "0.5");

    const Json j = Json::parse(read_text(dir / "transitions.json"));
    REQUIRE(j["cells"].size() == 3);
    const auto& tr = j["cells"][0]["transitions"];
    REQUIRE(tr.size() == 4);
    for (const char* name : {"willing_to_willing", "willing_to_hesitant", "hesitant_to_willing", "hesitant_to_hesitant"}) {
        REQUIRE(tr.contains(name));
        REQUIRE(tr[name].contains("model_lo"));
        REQUIRE(tr[name].contains("survey_lo"));
    }
    REQUIRE(tr["willing_to_willing"]["survey_lo"] == 0.86);
    REQUIRE(j["survey_reference"]["willing_to_willing"]["hi"] == 1.0);
    REQUIRE(res.manifest["runs"] == 75);
}

TEST_CASE("ensemble without a grid is one cell", "[commands][ensemble]") {
    const auto dir = scratch("ens1");
    EnsembleOptions opts;
    opts.seed_list = {3, 4};
    const auto res = ensemble(small_config(dir, 60), opts);
    REQUIRE(res.summary.cells.size() == 1);
    REQUIRE(read_csv(dir / "ensemble.csv").size() == 3);
    REQUIRE_THROWS_AS(parse_grid_axis("zeta=1,2"), ConfigError);
    REQUIRE_THROWS_AS(parse_grid_axis("p_L"), ConfigError);
}

TEST_CASE("gridsearch row counts", "[commands][gridsearch]") {
    SECTION("defaults give a 10 x 10 grid at one gamma") {
        const auto dir = scratch("grid_default");
        GridSearchOptions opts;
        opts.seed_count = 1;
        gridsearch(small_config(dir, 50), opts);
        const auto rows = read_csv(dir / "gridsearch.csv");
        REQUIRE(rows.size() == 101);
        REQUIRE(rows[0] == std::vector<std::string>{"alpha", "delta", "gamma", "mean_in_degree", "mean_clustering"});
        REQUIRE(rows[1][2] == "1.5");
    }
    SECTION("single cell") {
        const auto dir = scratch("grid_one");
        GridSearchOptions opts;
        opts.alphas = {2};
        opts.deltas = {8};
        gridsearch(small_config(dir, 50), opts);
        REQUIRE(read_csv(dir / "gridsearch.csv").size() == 2);
    }
    SECTION("two gammas") {
        const auto dir = scratch("grid_gamma");
        GridSearchOptions opts;
        opts.alphas = {1, 2};
        opts.deltas = {3};
        opts.gammas = {1.1, 2.0};
        opts.seed_count = 1;
        gridsearch(small_config(dir, 50), opts);
        REQUIRE(read_csv(dir / "gridsearch.csv").size() == 5);
    }
}

TEST_CASE("CLI exit codes", "[commands][cli]") {
    const auto dir = scratch("cli");
    REQUIRE(run_cli("simulate --preset paper-core --n 100 --seed 3 --out " + (dir / "ok").string()) == 0);
    REQUIRE(fs::exists(dir / "ok" / "manifest.json"));
    REQUIRE(run_cli("simulate --preset paper-core --n 100 --max-steps 1 --out " + (dir / "cap").string()) == 0);
    REQUIRE(run_cli("simulate --gamma -1 --out " + (dir / "bad").string()) == 1);
    REQUIRE(run_cli("simulate --preset nope") == 1);
    REQUIRE(run_cli("simulate --set gama=1.5 --out " + (dir / "bad").string()) == 1);
    REQUIRE(run_cli("frobnicate") == 1);

    // output directory blocked by a regular file
    fs::create_directories(dir);
    std::ofstream(dir / "blocker") << "x";
    REQUIRE(run_cli("simulate --n 50 --out " + (dir / "blocker" / "sub").string()) == 2);

    REQUIRE(run_cli("gridsearch --n 50 --alpha 2 --delta 8 --seeds 1 --out " + (dir / "grid").string()) == 0);
    REQUIRE(read_csv(dir / "grid" / "gridsearch.csv").size() == 2);
    REQUIRE(run_cli("ensemble --n 50 --seeds 2 --grid p_L,p_R=0,1 --out " + (dir / "ens").string()) == 0);
    REQUIRE(read_csv(dir / "ens" / "ensemble.csv").size() == 5);
}
