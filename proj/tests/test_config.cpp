#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "odyn/config.hpp"

using namespace odyn;
using Catch::Approx;

namespace {

std::string config_error_key(const Json& j) {
    try {
        (void)config_from_json(j);
    } catch (const ConfigError& e) {
        return e.key();
    }
    return "<none>";
}

} // namespace

TEST_CASE("presets", "[config]") {
    const RunConfig core = preset("paper-core");
    REQUIRE(core.n == std::optional<std::size_t>{1000});
    REQUIRE(core.delta == 8.0);
    REQUIRE(core.alpha == 2.0);
    REQUIRE(core.b == 1.5);
    REQUIRE(core.epsilon == 1.5);
    REQUIRE(core.gamma == 1.5);
    REQUIRE(core.belief_init.sigma == 0.5);

    const RunConfig vac = preset("paper-vaccine");
    REQUIRE(vac.belief_init.probs == std::vector<double>{0.69, 0.31});
    REQUIRE(vac.p_L == 0.35);
    REQUIRE(vac.p_R == 0.75);

    REQUIRE_THROWS_AS(preset("paper-nope"), ConfigError);
}

TEST_CASE("preset plus override", "[config]") {
    const RunConfig c = load_config(std::nullopt, std::string("paper-core"), Json{{"p_L", 1.0}});
    REQUIRE(c.p_L == 1.0);
    REQUIRE(c.p_R == 0.0);
    REQUIRE(c.delta == 8.0);

    const RunConfig v = config_from_json(Json{{"preset", "paper-vaccine"}, {"seed", 9}});
    REQUIRE(v.p_R == 0.75);
    REQUIRE(v.seed == 9);
}

TEST_CASE("validation names the offending key", "[config]") {
    REQUIRE(config_error_key(Json{{"gamma", -1}}) == "gamma");
    REQUIRE(config_error_key(Json{{"p_L", 1.5}}) == "p_L");
    REQUIRE(config_error_key(Json{{"b", 0}}) == "b");
    REQUIRE(config_error_key(Json{{"window", 0}}) == "window");
    REQUIRE(config_error_key(Json{{"n", -3}}) == "n");
    REQUIRE(config_error_key(Json{{"delta", "eight"}}) == "delta");
    REQUIRE(config_error_key(Json{{"belief_init", {{"probs", {0.3, 0.3}}}}}) == "belief_init");
    REQUIRE(config_error_key(Json{{"lambda_mode", "relative"}}) == "lambda_mode");
}

TEST_CASE("unknown keys are rejected", "[config]") {
    REQUIRE(config_error_key(Json{{"gama", 1.5}}) == "gama");
    REQUIRE(config_error_key(Json{{"domain", {{"rate", {1.0}}}}}) == "domain.rate");
    REQUIRE(config_error_key(Json{{"belief_init", {{"mu", 0}}}}) == "belief_init.mu");
}

TEST_CASE("effective lambda", "[config]") {
    RunConfig c;
    REQUIRE(effective_lambda(c) == Approx(0.1).epsilon(1e-15));
    c.lambda_mode = LambdaMode::absolute;
    c.lambda_value = 0.25;
    REQUIRE(effective_lambda(c) == 0.25);
    c.lambda_mode = LambdaMode::diameter_fraction;
    c.domain.triangles = {{0, 0, 1, 0, 0, 1}};
    REQUIRE(effective_lambda(c) == Approx(0.25 * std::sqrt(2.0)));
}

TEST_CASE("Poisson domains", "[config]") {
    const Json j{{"n", nullptr},
                 {"domain", {{"triangles", {{0, 0, 1, 0, 0, 1}, {10, 0, 11, 0, 10, 1}}}, {"rates", {200, 0}}}}};
    const RunConfig c = config_from_json(j);
    REQUIRE_FALSE(c.n.has_value());
    const auto p = to_model_params(c);
    REQUIRE(p.domain.triangles.size() == 2);

    REQUIRE(config_error_key(Json{{"domain", {{"triangles", {{0, 0, 1, 0, 0, 1}, {10, 0, 11, 0, 10, 1}}}}}}) == "n");
    REQUIRE(config_error_key(Json{{"n", nullptr}}) == "domain.rates");
    REQUIRE(config_error_key(Json{{"domain", {{"triangles", {{0, 0, 1, 1, 2, 2}}}}}}) == "domain.triangles");
}

TEST_CASE("JSON round trip and manifests", "[config]") {
    RunConfig c = preset("paper-vaccine");
    c.seed = 1234;
    c.emit_edges = {0, 3};
    c.mega_switching = true;
    const Json j = to_json(c);
    const RunConfig back = config_from_json(j);
    REQUIRE(to_json(back) == j);

    const Json manifest{{"manifest_version", 1}, {"config", j}, {"status", "converged"}};
    REQUIRE(to_json(config_from_json(manifest)) == j);
}

TEST_CASE("config files", "[config]") {
    const auto dir = std::filesystem::temp_directory_path() / "odyn_test_config";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "ok.json") << R"({"preset": "paper-core", "n": 250, "p_R": 0.4})";
        std::ofstream(dir / "bad.json") << R"({"n": 250,)";
    }
    const RunConfig c = load_config(dir / "ok.json");
    REQUIRE(c.n == std::optional<std::size_t>{250});
    REQUIRE(c.p_R == 0.4);

    const RunConfig over = load_config(dir / "ok.json", std::nullopt, Json{{"n", 10}});
    REQUIRE(over.n == std::optional<std::size_t>{10});
    REQUIRE(over.p_R == 0.4);

    REQUIRE_THROWS_AS(load_config(dir / "bad.json"), ConfigError);
    REQUIRE_THROWS_AS(load_config(dir / "missing.json"), IoError);
    std::filesystem::remove_all(dir);
}
