#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "imcmc/config.hpp"

using namespace imcmc;

TEST_CASE("toml subset parses the config surface") {
    const std::string text = R"(
# experiment description
schema = 1
model = "fk3"        # bundled
seed = 42
horizon = 4096
replicates = 50
suites = ["rates", "normalizers"]
ratio = 0.5
flag = true

[kernels]
2 = "mh"

[inline]
levels = 1
labels = ["a", "b"]
initial = [0.5, 0.5]
potentials = [[1.0, 2.0]]
transitions = [
  [[0.6, 0.4],
   [0.3, 0.7]],
]
)";
    nlohmann::json doc = parse_toml(text);
    CHECK(doc["model"] == "fk3");
    CHECK(doc["seed"] == 42);
    CHECK(doc["ratio"] == 0.5);
    CHECK(doc["flag"] == true);
    CHECK(doc["suites"].size() == 2);
    CHECK(doc["kernels"]["2"] == "mh");
    CHECK(doc["inline"]["transitions"][0][1][0] == 0.3);
}

TEST_CASE("toml errors carry line numbers") {
    CHECK_THROWS_WITH_AS(parse_toml("a = [1, 2"), doctest::Contains("line"), ConfigError);
    CHECK_THROWS_AS(parse_toml("x 1"), ConfigError);
    CHECK_THROWS_AS(parse_toml("k = \"unterminated"), ConfigError);
}

TEST_CASE("json and toml configs agree") {
    const std::string toml = R"(
model = "fk3"
seed = 9
horizon = 2048
replicates = 10
suites = ["rates"]
)";
    nlohmann::json as_json = {
        {"model", "fk3"}, {"seed", 9}, {"horizon", 2048}, {"replicates", 10},
        {"suites", {"rates"}},
    };
    ExperimentConfig a = config_from_json(parse_toml(toml));
    ExperimentConfig b = config_from_json(as_json);
    CHECK(a.model == b.model);
    CHECK(a.seed == b.seed);
    CHECK(a.horizon == b.horizon);
    CHECK(a.replicates == b.replicates);
    CHECK(a.suites == b.suites);
}

TEST_CASE("config validation") {
    SUBCASE("seed is mandatory") {
        nlohmann::json j = {{"model", "fk3"}};
        CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("seed"), ConfigError);
    }
    SUBCASE("unknown suite") {
        nlohmann::json j = {{"model", "fk3"}, {"seed", 1}, {"suites", {"nope"}}};
        CHECK_THROWS_AS(config_from_json(j), ConfigError);
    }
    SUBCASE("unknown kernel") {
        nlohmann::json j = {{"model", "fk3"}, {"seed", 1}, {"kernel", "gibbs"}};
        CHECK_THROWS_AS(config_from_json(j), ConfigError);
    }
    SUBCASE("bad replicate count") {
        nlohmann::json j = {{"model", "fk3"}, {"seed", 1}, {"replicates", 0}};
        CHECK_THROWS_AS(config_from_json(j), ConfigError);
    }
}

TEST_CASE("inline model round trip") {
    nlohmann::json inline_model = {
        {"levels", 2},
        {"labels", {"x", "y"}},
        {"initial", {0.5, 0.5}},
        {"potentials", {{1.0, 2.0}, {0.5, 1.0}}},
        {"transitions",
         {{{0.6, 0.4}, {0.3, 0.7}}, {{0.5, 0.5}, {0.2, 0.8}}}},
    };
    FeynmanKacModel model = model_from_json(inline_model);
    CHECK(model.num_levels() == 2);
    CHECK(model.transitions[0].at(1, 0) == doctest::Approx(0.3));

    nlohmann::json config = {{"model", "inline"}, {"seed", 5}, {"inline", inline_model}};
    ExperimentPlan plan = make_plan(config_from_json(config));
    REQUIRE(plan.model.has_value());
    CHECK(plan.model->num_levels() == 2);
    CHECK(plan.specs.size() == 3);
}

TEST_CASE("inline model validation failures") {
    nlohmann::json bad = {
        {"levels", 1},
        {"labels", {"x", "y"}},
        {"initial", {0.5, 0.5}},
        {"potentials", {{1.0, 2.0}}},
        {"transitions", {{{0.9, 0.6}, {0.3, 0.7}}}},  // row sums 1.5
    };
    CHECK_THROWS_AS(model_from_json(bad), InvalidKernelError);
}

TEST_CASE("plans wire kernels per level") {
    nlohmann::json config = {{"model", "fk3-path"}, {"seed", 3}, {"kernel", "mh"},
                             {"mh_steps", 2}};
    ExperimentPlan plan = make_plan(config_from_json(config));
    CHECK(plan.specs.size() == 4);
    for (int k = 1; k <= 3; ++k)
        CHECK(std::holds_alternative<MetropolisHastingsSpec>(plan.specs[k]));
    CHECK(std::get<MetropolisHastingsSpec>(plan.specs[1]).steps == 2);

    nlohmann::json bad = {{"model", "fk3"}, {"seed", 3}, {"kernel", "mh"}};
    CHECK_THROWS_AS(make_plan(config_from_json(bad)), ConfigError);

    nlohmann::json overrides = {{"model", "fk3-path"}, {"seed", 3},
                                 {"kernels", {{"2", "mh"}}}};
    ExperimentPlan mixed = make_plan(config_from_json(overrides));
    CHECK(std::holds_alternative<DirectPhiSpec>(mixed.specs[1]));
    CHECK(std::holds_alternative<MetropolisHastingsSpec>(mixed.specs[2]));

    nlohmann::json out_of_range = {{"model", "fk3"}, {"seed", 3},
                                    {"kernels", {{"9", "direct-phi"}}}};
    CHECK_THROWS_AS(make_plan(config_from_json(out_of_range)), ConfigError);
}

TEST_CASE("continuous experiments run under both kernel families") {
    for (const char* kernel : {"direct-phi", "mh"}) {
        nlohmann::json cfg = {{"model", "bilaplace-continuous"},
                              {"seed", 6},
                              {"kernel", kernel},
                              {"horizon", 256},
                              {"replicates", 4},
                              {"workers", 1},
                              {"suites", {"rates"}}};
        ExperimentPlan plan = make_plan(config_from_json(cfg));
        plan.checkpoints = {64, 128, 256};
        ExperimentResult result = run_experiment(plan);
        CHECK(!result.series.records.empty());
        for (const auto& rec : result.series.records) CHECK(std::isfinite(rec.error));
        CHECK(result.summary["suites"].contains("rates"));
        // Errors at the final checkpoint average to zero by construction of
        // the pooled reference.
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& rec : result.series.records)
            if (rec.n == 256 && rec.level == 1 && rec.function == "tanh") {
                sum += rec.error;
                ++count;
            }
        CHECK(count == 4);
        CHECK(std::abs(sum) <= 1e-12);
    }
}

TEST_CASE("continuous plans accept only rate diagnostics") {
    nlohmann::json ok = {{"model", "bilaplace-continuous"}, {"seed", 2}, {"suites", {"rates"}}};
    ExperimentPlan plan = make_plan(config_from_json(ok));
    CHECK(plan.continuous.has_value());
    nlohmann::json bad = {{"model", "bilaplace-continuous"}, {"seed", 2},
                          {"suites", {"rates", "stability"}}};
    CHECK_THROWS_AS(make_plan(config_from_json(bad)), ConfigError);
}
