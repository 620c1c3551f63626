#include "doctest.h"

#include <string>

#include "isc/analytics.hpp"
#include "isc/spec_io.hpp"
#include "support.hpp"

using namespace isc;

namespace {

std::string message_of(const std::string& text) {
    try {
        parse_spec(text, "spec.json");
    } catch (const SpecError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("bundled music club") {
    const auto spec = load_spec(test::data_path("music_club.json"));
    REQUIRE(std::holds_alternative<PopulationSpec>(spec));
    const auto& ps = std::get<PopulationSpec>(spec);
    CHECK(ps.population.size() == 6);
    CHECK(ps.population.labels() == std::vector<std::string>{"Pop", "Classical", "Oldies", "World", "Alternative"});
    CHECK(ps.params.request_size() == 1);
    const auto fixture = test::music_club();
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(ps.population.peer(i).supply == fixture.peer(i).supply);
        CHECK(ps.population.peer(i).demand == fixture.peer(i).demand);
        CHECK(ps.population.peer(i).payload_size == 2);
    }
    const auto model = MeanFieldModel::from_population(ps.population, ps.params);
    CHECK(model.k_rho() == 2.0);
}

TEST_CASE("bundled scenario templates") {
    for (const char* name : {"zipf_perfect", "zipf_shift_demand_excess", "zipf_shift_supply_excess", "zipf_bistable",
                             "zipf_simulation"}) {
        CAPTURE(name);
        const auto spec = load_spec(test::data_path(std::string("scenarios/") + name + ".json"));
        REQUIRE(std::holds_alternative<ScenarioSpec>(spec));
        CHECK_NOTHROW(MeanFieldModel::from_scenario(std::get<ScenarioSpec>(spec)));
    }
    const auto bistable = std::get<ScenarioSpec>(load_spec(test::data_path("scenarios/zipf_bistable.json")));
    CHECK(bistable.request_size == 2);
    CHECK(bistable.population > 1889);
}

TEST_CASE("syntax errors carry line and column") {
    const auto msg = message_of("{\n  \"rho\": 1,\n  \"d\": ,\n}");
    CHECK(msg.rfind("spec.json:3:", 0) == 0);
}

TEST_CASE("validation errors carry a JSON pointer") {
    const std::string base = R"({"rho": 1, "d": 1, "peers": [{"K": 2, "M": 1, "g": [0.5, 0.5], "h": [0.5, 0.5]}, )";
    CHECK(message_of(base + R"({"K": 2, "M": 1, "g": [0.5, 0.4], "h": [0.5, 0.5]}]})").find("at /peers/1/g:") !=
          std::string::npos);
    CHECK(message_of(base + R"({"K": -1, "M": 1, "g": [0.5, 0.5], "h": [0.5, 0.5]}]})").find("at /peers/1/K:") !=
          std::string::npos);
    CHECK(message_of(base + R"({"K": 1, "M": 0, "g": [0.5, 0.5], "h": [0.5, 0.5]}]})").find("at /peers/1/M:") !=
          std::string::npos);
    CHECK(message_of(base + R"({"K": 1, "M": 1, "g": [0.5, 0.5], "h": [1.0]}]})").find("at /peers/1/h:") !=
          std::string::npos);
    CHECK(message_of(base + R"({"K": 1, "M": 1, "g": [0.5, 0.5]}]})").find("missing field \"h\"") !=
          std::string::npos);
    CHECK(message_of(R"({"rho": 1.5, "d": 1, "peers": [{"K": 2, "M": 1, "g": [1], "h": [1]}]})").find("at /rho:") !=
          std::string::npos);
    CHECK(message_of(R"({"kind": "zipf", "beta": 1})").find("at /kind:") != std::string::npos);
    CHECK(message_of(R"({"kind": "zipf_shift", "beta": 0.6, "s_max": 10, "delta": 10, "N": 5, "k": 1, "rho": 1,
        "d": 1})")
              .find("at /:") != std::string::npos);
    CHECK(message_of("[1, 2]").find("neither") != std::string::npos);
    CHECK_THROWS_AS(load_spec(test::data_path("missing.json")), SpecError);
}

TEST_CASE("near-normalized input is accepted and renormalized") {
    const auto spec = parse_population_spec(
        R"({"rho": 1, "d": 1, "peers": [{"K": 1, "M": 1, "g": [0.3333333, 0.6666667], "h": [1, 0]}]})");
    const auto& g = spec.population.peer(0).supply;
    CHECK(g[0] + g[1] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("scenario fields") {
    const auto sc = parse_scenario_spec(R"({"kind": "zipf_shift", "beta": 0.6, "s_max": 1000, "delta": -400,
        "direction": "supply_lead", "N": 100, "k": 2.5, "rho": 0.4, "d": 2})");
    CHECK(sc.kind == ScenarioKind::zipf_shift);
    CHECK(sc.delta == -400);
    CHECK(sc.direction == ShiftDirection::supply_lead);
    CHECK(sc.population == 100);
    CHECK(sc.mean_payload == 2.5);
    CHECK(sc.search_efficiency == 0.4);
    CHECK(sc.request_size == 2);
}
