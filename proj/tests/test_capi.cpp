#include <doctest.h>

#include <cstring>
#include <string>

#include <json.hpp>

#include "msw/c_api.h"

TEST_CASE("c api: scenario lifecycle and error reporting") {
    msw_scenario* scn = nullptr;
    CHECK(msw_scenario_create("not_a_scenario", 0, &scn) == MSW_ERR_INVALID_ARGUMENT);
    CHECK(std::string(msw_last_error()).find("unknown scenario") != std::string::npos);

    REQUIRE(msw_scenario_create("stay_back", 4, &scn) == MSW_OK);
    REQUIRE(scn != nullptr);

    char* json_text = nullptr;
    REQUIRE(msw_scenario_to_json(scn, &json_text) == MSW_OK);
    const auto parsed = nlohmann::json::parse(json_text);
    CHECK(parsed.at("scenario") == "stay_back");
    CHECK(parsed.at("seed") == 4);
    msw_string_free(json_text);

    // round-trip through from_json
    char* again = nullptr;
    REQUIRE(msw_scenario_to_json(scn, &again) == MSW_OK);
    msw_scenario* scn2 = nullptr;
    REQUIRE(msw_scenario_from_json(again, &scn2) == MSW_OK);
    char* round = nullptr;
    REQUIRE(msw_scenario_to_json(scn2, &round) == MSW_OK);
    CHECK(std::string(round) == std::string(again));
    msw_string_free(again);
    msw_string_free(round);
    msw_scenario_destroy(scn2);

    // merge patch
    CHECK(msw_scenario_patch(scn, "{\"episode_steps\": 5}") == MSW_OK);
    CHECK(msw_scenario_patch(scn, "{\"episode_steps\": 0}") == MSW_ERR_BAD_CONFIG);

    msw_episode* ep = nullptr;
    CHECK(msw_episode_run(scn, "hoverboard", &ep) == MSW_ERR_INVALID_ARGUMENT);
    REQUIRE(msw_episode_run(scn, "switcher:conservative", &ep) == MSW_OK);
    CHECK(msw_episode_steps(ep) == 5);

    char* csv = nullptr;
    REQUIRE(msw_episode_csv(ep, &csv) == MSW_OK);
    CHECK(std::string(csv).find("t,rung,model") == 0);
    msw_string_free(csv);

    char* summary = nullptr;
    REQUIRE(msw_episode_summary_json(ep, &summary) == MSW_OK);
    const auto sj = nlohmann::json::parse(summary);
    CHECK(sj.at("steps") == 5);
    CHECK(sj.at("method") == "switcher:conservative");
    msw_string_free(summary);

    msw_episode_destroy(ep);
    msw_scenario_destroy(scn);
}

TEST_CASE("c api: experiment spec errors and null arguments") {
    CHECK(msw_experiment_run(nullptr, nullptr) == MSW_ERR_INVALID_ARGUMENT);
    char* out = nullptr;
    CHECK(msw_experiment_run("{not json", &out) == MSW_ERR_BAD_CONFIG);
    CHECK(msw_experiment_run("{\"scenario\": \"stay_back\", \"methods\": []}", &out) ==
          MSW_ERR_BAD_CONFIG);

    const char* spec =
        "{\"scenario\": \"stay_back\", \"methods\": [\"naive\"], \"seeds\": 1,"
        " \"config_patch\": {\"episode_steps\": 4}}";
    REQUIRE(msw_experiment_run(spec, &out) == MSW_OK);
    const auto sj = nlohmann::json::parse(out);
    CHECK(sj.at("methods").size() == 1);
    CHECK(sj.at("methods")[0].at("episodes") == 1);
    msw_string_free(out);
}

TEST_CASE("c api: calibrate returns a positive time") {
    double t_base = 0.0;
    REQUIRE(msw_calibrate(3, &t_base) == MSW_OK);
    CHECK(t_base > 0.0);
    CHECK(t_base < 10.0);
    CHECK(msw_calibrate(0, &t_base) == MSW_ERR_INVALID_ARGUMENT);
}

TEST_CASE("c api: version string") {
    CHECK(std::strlen(msw_version()) > 0);
}
