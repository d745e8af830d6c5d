#ifndef MSW_EXPERIMENT_HPP
#define MSW_EXPERIMENT_HPP

#include <string>
#include <vector>

#include "msw/sim.hpp"

namespace msw {

// One experiment: a scenario swept over methods and seeds.
struct ExperimentSpec {
    ScenarioKind scenario = ScenarioKind::stay_back;
    std::vector<Method> methods;
    int seeds = 30;
    std::string out_dir;  // empty: nothing persisted
    int workers = 1;
    // Optional JSON merge-patch applied to every built ScenarioConfig.
    std::string config_patch;
};

struct MethodSummary {
    std::string method;
    int episodes = 0;
    int failures = 0;
    double mean_reward = 0.0;
    double mean_meta_reward = 0.0;
    double mean_plan_seconds = 0.0;
    double mean_decision_seconds = 0.0;
    std::array<double, 3> usage{};  // fraction of steps per model kind
    int collisions = 0;             // episodes with at least one violation
    // scenario metrics
    double merge_fraction = 0.0;          // merger: robot reached the left lane
    double mean_human_lane_step = 0.0;    // give way: mean first step the human is in lane
};

struct Summary {
    int schema_version = 1;
    int feature_registry_version = kFeatureRegistryVersion;
    std::string scenario;
    int seeds = 0;
    std::vector<MethodSummary> methods;
};

// Runs every (method, seed) episode. With an out_dir, persists one CSV per
// episode plus summary.json and timeseries.csv.
Summary run_experiment(const ExperimentSpec& spec);

// Per-timestep means across seeds, aligned by step index, plus the model
// trace; reproduces the per-step compute plots.
std::string emit_timeseries(const std::vector<EpisodeLog>& logs);

// One CSV per episode; timing columns are the only run-to-run variant part.
std::string episode_csv(const EpisodeLog& log);
EpisodeLog episode_from_csv(const std::string& csv, ScenarioKind kind, std::uint64_t seed,
                            const std::string& method);

Summary summarize(ScenarioKind scenario, int seeds, const std::vector<EpisodeLog>& logs);
std::string summary_json(const Summary& s);

// Re-summarize a persisted experiment directory.
Summary replay(const std::string& out_dir);

// Measures the median wall-clock of a Naive plan on this machine; the value
// is meant to be pinned in config as t_base.
double calibrate_t_base(int samples);

}  // namespace msw

#endif  // MSW_EXPERIMENT_HPP
