// Command-line harness for the model-switching driving experiments. Talks to
// the core library exclusively through its C API.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "msw/c_api.h"

namespace {

int fail(const char* what) {
    std::fprintf(stderr, "error: %s: %s\n", what, msw_last_error());
    return 1;
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-switching MPC driving experiments"};
    app.require_subcommand(1);

    // run
    std::string scenario = "stay_back";
    std::vector<std::string> methods;
    int seeds = 30;
    std::string out_dir;
    int workers = 1;
    std::string config_file;
    std::string lambdas;
    auto* run = app.add_subcommand("run", "run an experiment and print the summary");
    run->add_option("--scenario", scenario, "stay_back | merger | give_way")->capture_default_str();
    run->add_option("--methods", methods,
                    "naive | turn | tom | switcher:<lambda> | switcher:conservative | "
                    "switcher:aggressive")
        ->delimiter(',');
    run->add_option("--lambda", lambdas,
                    "comma-separated lambdas; shorthand adding switcher:<l> methods");
    run->add_option("--seeds", seeds, "number of seeds")->capture_default_str();
    run->add_option("--out", out_dir, "output directory for CSV logs and summary");
    run->add_option("--workers", workers, "parallel episode workers")->capture_default_str();
    run->add_option("--config", config_file, "JSON merge-patch applied to every scenario config");

    // replay
    std::string replay_dir;
    auto* rep = app.add_subcommand("replay", "re-summarize a persisted experiment directory");
    rep->add_option("dir", replay_dir, "experiment output directory")->required();

    // calibrate
    int samples = 30;
    auto* cal = app.add_subcommand("calibrate", "measure Naive planning time for t_base");
    cal->add_option("--samples", samples, "number of timed plans")->capture_default_str();

    // print-config
    std::string pc_scenario = "stay_back";
    uint64_t pc_seed = 0;
    auto* pc = app.add_subcommand("print-config", "print a scenario config as JSON");
    pc->add_option("--scenario", pc_scenario, "scenario kind")->capture_default_str();
    pc->add_option("--seed", pc_seed, "seed")->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        if (methods.empty()) methods = {"naive", "turn", "switcher:conservative"};
        if (!lambdas.empty()) {
            std::stringstream ss(lambdas);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) methods.push_back("switcher:" + item);
        }
        nlohmann::json spec{{"scenario", scenario},
                            {"methods", methods},
                            {"seeds", seeds},
                            {"out_dir", out_dir},
                            {"workers", workers}};
        if (!config_file.empty()) {
            try {
                spec["config_patch"] = nlohmann::json::parse(read_file(config_file));
            } catch (const std::exception& e) {
                std::fprintf(stderr, "error: --config: %s\n", e.what());
                return 1;
            }
        }
        char* summary = nullptr;
        if (msw_experiment_run(spec.dump().c_str(), &summary) != MSW_OK)
            return fail("run");
        std::cout << summary << "\n";
        msw_string_free(summary);
        return 0;
    }

    if (rep->parsed()) {
        char* summary = nullptr;
        if (msw_replay(replay_dir.c_str(), &summary) != MSW_OK) return fail("replay");
        std::cout << summary << "\n";
        msw_string_free(summary);
        return 0;
    }

    if (cal->parsed()) {
        double t_base = 0.0;
        if (msw_calibrate(samples, &t_base) != MSW_OK) return fail("calibrate");
        std::printf("measured naive planning time: %.6f s\n", t_base);
        std::printf("suggested config patch: {\"t_base\": %.6f}\n", t_base);
        std::printf("nominal ladder costs would be %.6f / %.6f / %.6f s\n", t_base, 2 * t_base,
                    4 * t_base);
        return 0;
    }

    if (pc->parsed()) {
        msw_scenario* scn = nullptr;
        if (msw_scenario_create(pc_scenario.c_str(), pc_seed, &scn) != MSW_OK)
            return fail("print-config");
        char* text = nullptr;
        if (msw_scenario_to_json(scn, &text) != MSW_OK) {
            msw_scenario_destroy(scn);
            return fail("print-config");
        }
        std::cout << text << "\n";
        msw_string_free(text);
        msw_scenario_destroy(scn);
        return 0;
    }

    return 0;
}
