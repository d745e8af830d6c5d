#include "msw/c_api.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include <json.hpp>

#include "msw/config.hpp"
#include "msw/experiment.hpp"

namespace {

thread_local std::string g_last_error;

msw_status set_error(msw::Errc code, const std::string& what) {
    g_last_error = what;
    switch (code) {
        case msw::Errc::invalid_argument: return MSW_ERR_INVALID_ARGUMENT;
        case msw::Errc::bad_config: return MSW_ERR_BAD_CONFIG;
        case msw::Errc::runtime: return MSW_ERR_RUNTIME;
        case msw::Errc::io: return MSW_ERR_IO;
    }
    return MSW_ERR_RUNTIME;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) return nullptr;
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <class F>
msw_status guarded(F&& body) {
    try {
        return body();
    } catch (const msw::Error& e) {
        return set_error(e.code(), e.what());
    } catch (const std::bad_alloc&) {
        return set_error(msw::Errc::runtime, "out of memory");
    } catch (const std::exception& e) {
        return set_error(msw::Errc::runtime, e.what());
    } catch (...) {
        return set_error(msw::Errc::runtime, "unknown error");
    }
}

msw_status require(bool ok, const char* what) {
    if (ok) return MSW_OK;
    return set_error(msw::Errc::invalid_argument, what);
}

}  // namespace

struct msw_scenario {
    msw::ScenarioConfig cfg;
};

struct msw_episode {
    msw::EpisodeLog log;
};

extern "C" {

const char* msw_version(void) { return "1.0.0"; }

const char* msw_last_error(void) { return g_last_error.c_str(); }

void msw_string_free(char* s) { std::free(s); }

msw_status msw_scenario_create(const char* kind, uint64_t seed, msw_scenario** out) {
    if (require(kind && out, "msw_scenario_create: null argument") != MSW_OK)
        return MSW_ERR_INVALID_ARGUMENT;
    return guarded([&]() {
        auto* s = new msw_scenario{msw::build_scenario(msw::scenario_kind_from_name(kind), seed)};
        *out = s;
        return MSW_OK;
    });
}

msw_status msw_scenario_from_json(const char* json, msw_scenario** out) {
    if (require(json && out, "msw_scenario_from_json: null argument") != MSW_OK)
        return MSW_ERR_INVALID_ARGUMENT;
    return guarded([&]() {
        auto* s = new msw_scenario{msw::scenario_from_json(json)};
        *out = s;
        return MSW_OK;
    });
}

msw_status msw_scenario_patch(msw_scenario* scenario, const char* patch_json) {
    if (require(scenario && patch_json, "msw_scenario_patch: null argument") != MSW_OK)
        return MSW_ERR_INVALID_ARGUMENT;
    return guarded([&]() {
        scenario->cfg = msw::scenario_patched(scenario->cfg, patch_json);
        return MSW_OK;
    });
}

msw_status msw_scenario_to_json(const msw_scenario* scenario, char** out_json) {
    if (require(scenario && out_json, "msw_scenario_to_json: null argument") != MSW_OK)
        return MSW_ERR_INVALID_ARGUMENT;
    return guarded([&]() {
        *out_json = dup_string(msw::scenario_to_json(scenario->cfg));
        return *out_json ? MSW_OK : set_error(msw::Errc::runtime, "out of memory");
    });
}

void msw_scenario_destroy(msw_scenario* scenario) { delete scenario; }

msw_status msw_episode_run(const msw_scenario* scenario, const char* method, msw_episode** out) {
    if (require(scenario && method && out, "msw_episode_run: null argument") != MSW_OK)
        return MSW_ERR_INVALID_ARGUMENT;
    return guarded([&]() {
        auto* e = new msw_episode{
            msw::run_episode(scenario->cfg, msw::Method::parse(method))};
        *out = e;
        return MSW_OK;
    });
}

int msw_episode_steps(const msw_episode* episode) {
    return episode ? static_cast<int>(episode->log.steps.size()) : -1;
}

msw_status msw_episode_csv(const msw_episode* episode, char** out_csv) {
    if (require(episode && out_csv, "msw_episode_csv: null argument") != MSW_OK)
        return MSW_ERR_INVALID_ARGUMENT;
    return guarded([&]() {
        *out_csv = dup_string(msw::episode_csv(episode->log));
        return *out_csv ? MSW_OK : set_error(msw::Errc::runtime, "out of memory");
    });
}

msw_status msw_episode_summary_json(const msw_episode* episode, char** out_json) {
    if (require(episode && out_json, "msw_episode_summary_json: null argument") != MSW_OK)
        return MSW_ERR_INVALID_ARGUMENT;
    return guarded([&]() {
        const msw::EpisodeLog& log = episode->log;
        nlohmann::json usage = nlohmann::json::object();
        for (int k = 0; k < 3; ++k)
            usage[msw::model_kind_name(static_cast<msw::ModelKind>(k))] =
                log.steps.empty()
                    ? 0.0
                    : static_cast<double>(log.steps_per_kind[static_cast<std::size_t>(k)]) /
                          static_cast<double>(log.steps.size());
        const nlohmann::json j{{"scenario", msw::scenario_kind_name(log.kind)},
                               {"seed", log.seed},
                               {"method", log.method},
                               {"steps", log.steps.size()},
                               {"total_reward", log.total_reward},
                               {"total_meta_reward", log.total_meta_reward},
                               {"total_plan_seconds", log.total_plan_seconds},
                               {"total_decide_seconds", log.total_decide_seconds},
                               {"usage", usage},
                               {"collision_steps", log.collisions},
                               {"failed", log.failed}};
        *out_json = dup_string(j.dump(2));
        return *out_json ? MSW_OK : set_error(msw::Errc::runtime, "out of memory");
    });
}

void msw_episode_destroy(msw_episode* episode) { delete episode; }

msw_status msw_experiment_run(const char* spec_json, char** out_summary_json) {
    if (require(spec_json && out_summary_json, "msw_experiment_run: null argument") != MSW_OK)
        return MSW_ERR_INVALID_ARGUMENT;
    return guarded([&]() {
        const msw::Summary s = msw::run_experiment(msw::experiment_spec_from_json(spec_json));
        *out_summary_json = dup_string(msw::summary_json(s));
        return *out_summary_json ? MSW_OK : set_error(msw::Errc::runtime, "out of memory");
    });
}

msw_status msw_replay(const char* out_dir, char** out_summary_json) {
    if (require(out_dir && out_summary_json, "msw_replay: null argument") != MSW_OK)
        return MSW_ERR_INVALID_ARGUMENT;
    return guarded([&]() {
        const msw::Summary s = msw::replay(out_dir);
        *out_summary_json = dup_string(msw::summary_json(s));
        return *out_summary_json ? MSW_OK : set_error(msw::Errc::runtime, "out of memory");
    });
}

msw_status msw_calibrate(int samples, double* out_t_base_seconds) {
    if (require(out_t_base_seconds != nullptr, "msw_calibrate: null argument") != MSW_OK)
        return MSW_ERR_INVALID_ARGUMENT;
    return guarded([&]() {
        *out_t_base_seconds = msw::calibrate_t_base(samples);
        return MSW_OK;
    });
}

}  // extern "C"
