#ifndef MSW_SIM_HPP
#define MSW_SIM_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "msw/switcher.hpp"

namespace msw {

enum class ScenarioKind { stay_back = 0, merger = 1, give_way = 2 };
const char* scenario_kind_name(ScenarioKind k);
ScenarioKind scenario_kind_from_name(const std::string& name);

// Full, self-contained description of one episode setup. build_scenario is
// deterministic per (kind, seed); everything here round-trips through JSON.
struct ScenarioConfig {
    ScenarioKind kind = ScenarioKind::stay_back;
    std::uint64_t seed = 0;
    int episode_steps = 40;
    JointState initial;
    PlanningContext ctx;              // env, weights, budget, dynamics, box
    FeatureWeights sim_human_weights; // the true (hidden) driver
    std::vector<ModelKind> ladder_kinds;
    double t_base = 0.1;              // nominal seconds per Naive plan
    double lambda_conservative = 0.0;
    double lambda_aggressive = 0.0;
    SwitcherConfig switcher;          // cooldown, delta bounds; lambda filled per method
    std::string weight_preset;
    int schema_version = 1;
    int feature_registry_version = kFeatureRegistryVersion;

    Ladder ladder() const { return make_ladder(ladder_kinds, t_base); }
};

ScenarioConfig build_scenario(ScenarioKind kind, std::uint64_t seed);

// The simulated driver the robot cannot see: a reward-maximizing responder
// that predicts the robot continues its last executed control.
struct SimulatedHuman {
    FeatureWeights weights;
    OptBudget budget;
    ControlSeq warm;
    bool has_warm = false;
};

Control human_act(SimulatedHuman& h, const JointState& js, Control last_robot_control,
                  const PlanningContext& ctx, int route_offset = 0);

// A method under evaluation: a fixed rung or the switcher at some lambda.
struct Method {
    enum class Type { fixed, switcher };
    Type type = Type::fixed;
    ModelKind fixed_kind = ModelKind::naive;
    double lambda = 0.0;
    // "conservative" / "aggressive": resolve lambda from the scenario preset.
    std::string lambda_preset;
    std::string name() const;
    static Method parse(const std::string& text);
};

struct StepRecord {
    int t = 0;
    int rung = 0;
    ModelKind kind = ModelKind::naive;
    Control u_robot{};
    Control u_human{};
    JointState state;  // state the step started from
    double realized_reward = 0.0;
    double meta_reward = 0.0;
    double plan_seconds = 0.0;
    double decide_seconds = 0.0;
    std::optional<SwitchEvaluation> eval;
    bool collision = false;  // at the post-step state
};

struct EpisodeLog {
    ScenarioKind kind = ScenarioKind::stay_back;
    std::uint64_t seed = 0;
    std::string method;
    std::vector<StepRecord> steps;
    double total_reward = 0.0;
    double total_meta_reward = 0.0;
    double total_plan_seconds = 0.0;
    double total_decide_seconds = 0.0;
    std::array<int, 3> steps_per_kind{};  // indexed by ModelKind
    int collisions = 0;
    bool failed = false;
    std::string fail_reason;
};

// Normalized elliptical proximity test between two cars.
bool cars_collide(const State& a, const State& b);
// True if the robot overlaps the human or any scripted car.
bool robot_collision(const JointState& js);

// Probe callback, invoked after each switch-up evaluation with everything an
// exact re-planning oracle needs to second-guess the decision.
struct ProbeRecord {
    int t = 0;
    JointState state;
    Plan plan;
    Control observed_human{};
    int rung = 0;
    WarmStart warm;            // warm-start state the planner had at this step
    SimulatedHuman human;      // simulated-human state before acting this step
    SwitchEvaluation eval;
};
using ProbeHook = std::function<void(const ProbeRecord&)>;

EpisodeLog run_episode(const ScenarioConfig& cfg, const Method& method,
                       const ProbeHook* probe = nullptr);

// Scenario metrics (from logged states): first step the car's lateral
// position is within tol of the lane center, or -1.
int first_lane_reach_step(const EpisodeLog& log, bool human_car, double lane_center_y,
                          double tol = 0.7);

// Merger metric: first step the robot sits in the left lane inside the
// target gap (ahead of the human, behind the lead car), or -1.
int merge_complete_step(const EpisodeLog& log, double lane_center_y = 3.0, double tol = 0.55);

}  // namespace msw

#endif  // MSW_SIM_HPP
