#include "msw/config.hpp"

#include <json.hpp>

namespace msw {

using nlohmann::json;

namespace {

json state_to_json(const State& s) {
    return json{{"x", s.x}, {"y", s.y}, {"heading", s.heading}, {"speed", s.speed}};
}
State state_from_json(const json& j) {
    return State{j.at("x").get<double>(), j.at("y").get<double>(), j.at("heading").get<double>(),
                 j.at("speed").get<double>()};
}

json control_to_json(const Control& u) {
    return json{{"steer", u.steer}, {"accel", u.accel}};
}
Control control_from_json(const json& j) {
    return Control{j.at("steer").get<double>(), j.at("accel").get<double>()};
}

json weights_to_json(const FeatureWeights& w) {
    json j = json::object();
    for (int i = 0; i < kFeatureCount; ++i) j[feature_name(i)] = w[i];
    return j;
}
FeatureWeights weights_from_json(const json& j) {
    FeatureWeights w;
    for (int i = 0; i < kFeatureCount; ++i) w[i] = j.at(feature_name(i)).get<double>();
    return w;
}

json env_to_json(const Environment& env) {
    json lanes = json::array();
    for (const Lane& l : env.lanes) lanes.push_back({{"center_y", l.center_y}, {"half_width", l.half_width}});
    json cones = json::array();
    for (const Cone& c : env.cones) cones.push_back({{"x", c.x}, {"y", c.y}, {"radius", c.radius}});
    json routes = json::array();
    for (const Route& r : env.other_routes) {
        json route = json::array();
        for (const Control& u : r.controls) route.push_back(control_to_json(u));
        routes.push_back(route);
    }
    return json{{"lanes", lanes},
                {"cones", cones},
                {"speed_limit", env.speed_limit},
                {"y_min", env.y_min},
                {"y_max", env.y_max},
                {"robot_goal_lane", env.robot_goal_lane},
                {"human_goal_lane", env.human_goal_lane},
                {"other_routes", routes},
                {"anticipation_tau", env.anticipation_tau},
                {"anticipation_tau_other", env.anticipation_tau_other},
                {"car_scale_x", env.car_scale_x},
                {"car_scale_y", env.car_scale_y},
                {"cone_scale_margin", env.cone_scale_margin},
                {"headway_boost", env.headway_boost},
                {"headway_sharpness", env.headway_sharpness},
                {"headway_lane_gate", env.headway_lane_gate},
                {"boundary_margin", env.boundary_margin},
                {"boundary_sharpness", env.boundary_sharpness},
                {"speed_limit_sharpness", env.speed_limit_sharpness}};
}

Environment env_from_json(const json& j) {
    Environment env;
    env.lanes.clear();
    for (const json& l : j.at("lanes"))
        env.lanes.push_back(Lane{l.at("center_y").get<double>(), l.at("half_width").get<double>()});
    env.cones.clear();
    for (const json& c : j.at("cones"))
        env.cones.push_back(
            Cone{c.at("x").get<double>(), c.at("y").get<double>(), c.at("radius").get<double>()});
    env.speed_limit = j.at("speed_limit").get<double>();
    env.y_min = j.at("y_min").get<double>();
    env.y_max = j.at("y_max").get<double>();
    env.robot_goal_lane = j.at("robot_goal_lane").get<int>();
    env.human_goal_lane = j.at("human_goal_lane").get<int>();
    env.other_routes.clear();
    for (const json& r : j.at("other_routes")) {
        Route route;
        for (const json& u : r) route.controls.push_back(control_from_json(u));
        env.other_routes.push_back(route);
    }
    env.anticipation_tau = j.at("anticipation_tau").get<double>();
    env.anticipation_tau_other = j.at("anticipation_tau_other").get<double>();
    env.car_scale_x = j.at("car_scale_x").get<double>();
    env.car_scale_y = j.at("car_scale_y").get<double>();
    env.cone_scale_margin = j.at("cone_scale_margin").get<double>();
    env.headway_boost = j.at("headway_boost").get<double>();
    env.headway_sharpness = j.at("headway_sharpness").get<double>();
    env.headway_lane_gate = j.at("headway_lane_gate").get<double>();
    env.boundary_margin = j.at("boundary_margin").get<double>();
    env.boundary_sharpness = j.at("boundary_sharpness").get<double>();
    env.speed_limit_sharpness = j.at("speed_limit_sharpness").get<double>();
    if (env.lanes.empty()) throw Error(Errc::bad_config, "environment: needs at least one lane");
    for (const Cone& c : env.cones)
        if (!(c.radius > 0.0)) throw Error(Errc::bad_config, "environment: cone radius <= 0");
    return env;
}

json joint_to_json(const JointState& js) {
    json others = json::array();
    for (const State& o : js.others) others.push_back(state_to_json(o));
    return json{{"robot", state_to_json(js.robot)},
                {"human", state_to_json(js.human)},
                {"others", others}};
}
JointState joint_from_json(const json& j) {
    JointState js;
    js.robot = state_from_json(j.at("robot"));
    js.human = state_from_json(j.at("human"));
    for (const json& o : j.at("others")) js.others.push_back(state_from_json(o));
    return js;
}

json scenario_to_json_obj(const ScenarioConfig& cfg) {
    json ladder = json::array();
    for (ModelKind k : cfg.ladder_kinds) ladder.push_back(model_kind_name(k));
    return json{
        {"schema_version", cfg.schema_version},
        {"feature_registry_version", cfg.feature_registry_version},
        {"scenario", scenario_kind_name(cfg.kind)},
        {"seed", cfg.seed},
        {"episode_steps", cfg.episode_steps},
        {"weight_preset", cfg.weight_preset},
        {"initial", joint_to_json(cfg.initial)},
        {"env", env_to_json(cfg.ctx.env)},
        {"robot_weights", weights_to_json(cfg.ctx.robot_weights)},
        {"human_weights", weights_to_json(cfg.ctx.human_weights)},
        {"sim_human_weights", weights_to_json(cfg.sim_human_weights)},
        {"dynamics",
         {{"friction", cfg.ctx.dyn.friction},
          {"dt", cfg.ctx.dyn.dt},
          {"allow_reverse", cfg.ctx.dyn.allow_reverse},
          {"speed_floor_sharpness", cfg.ctx.dyn.speed_floor_sharpness}}},
        {"control_box", {{"steer_max", cfg.ctx.box.steer_max}, {"accel_max", cfg.ctx.box.accel_max}}},
        {"budget",
         {{"steps", cfg.ctx.budget.steps},
          {"learn_rate", cfg.ctx.budget.learn_rate},
          {"horizon", cfg.ctx.budget.horizon}}},
        {"ladder", ladder},
        {"t_base", cfg.t_base},
        {"lambda_conservative", cfg.lambda_conservative},
        {"lambda_aggressive", cfg.lambda_aggressive},
        {"switcher",
         {{"cooldown", cfg.switcher.cooldown},
          {"delta_fraction", cfg.switcher.delta_fraction},
          {"start_rung", cfg.switcher.start_rung}}},
    };
}

ScenarioConfig scenario_from_json_obj(const json& j) {
    ScenarioConfig cfg;
    cfg.schema_version = j.at("schema_version").get<int>();
    if (cfg.schema_version != 1)
        throw Error(Errc::bad_config, "unsupported scenario schema_version");
    cfg.feature_registry_version = j.at("feature_registry_version").get<int>();
    if (cfg.feature_registry_version != kFeatureRegistryVersion)
        throw Error(Errc::bad_config, "unsupported feature_registry_version");
    cfg.kind = scenario_kind_from_name(j.at("scenario").get<std::string>());
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.episode_steps = j.at("episode_steps").get<int>();
    if (cfg.episode_steps < 1) throw Error(Errc::bad_config, "episode_steps must be >= 1");
    cfg.weight_preset = j.at("weight_preset").get<std::string>();
    cfg.initial = joint_from_json(j.at("initial"));
    cfg.ctx.env = env_from_json(j.at("env"));
    cfg.ctx.robot_weights = weights_from_json(j.at("robot_weights"));
    cfg.ctx.human_weights = weights_from_json(j.at("human_weights"));
    cfg.sim_human_weights = weights_from_json(j.at("sim_human_weights"));
    const json& dyn = j.at("dynamics");
    cfg.ctx.dyn.friction = dyn.at("friction").get<double>();
    cfg.ctx.dyn.dt = dyn.at("dt").get<double>();
    cfg.ctx.dyn.allow_reverse = dyn.at("allow_reverse").get<bool>();
    cfg.ctx.dyn.speed_floor_sharpness = dyn.at("speed_floor_sharpness").get<double>();
    if (!(cfg.ctx.dyn.dt > 0.0) || cfg.ctx.dyn.friction < 0.0)
        throw Error(Errc::bad_config, "invalid dynamics params");
    const json& box = j.at("control_box");
    cfg.ctx.box.steer_max = box.at("steer_max").get<double>();
    cfg.ctx.box.accel_max = box.at("accel_max").get<double>();
    const json& budget = j.at("budget");
    cfg.ctx.budget.steps = budget.at("steps").get<int>();
    cfg.ctx.budget.learn_rate = budget.at("learn_rate").get<double>();
    cfg.ctx.budget.horizon = budget.at("horizon").get<int>();
    validate(cfg.ctx.budget);
    cfg.ladder_kinds.clear();
    for (const json& k : j.at("ladder"))
        cfg.ladder_kinds.push_back(model_kind_from_name(k.get<std::string>()));
    cfg.t_base = j.at("t_base").get<double>();
    cfg.lambda_conservative = j.at("lambda_conservative").get<double>();
    cfg.lambda_aggressive = j.at("lambda_aggressive").get<double>();
    const json& sw = j.at("switcher");
    cfg.switcher.cooldown = sw.at("cooldown").get<int>();
    cfg.switcher.delta_fraction = sw.at("delta_fraction").get<double>();
    cfg.switcher.start_rung = sw.at("start_rung").get<int>();
    validate(cfg.switcher);
    cfg.ladder();  // validates rung ordering
    return cfg;
}

}  // namespace

std::string scenario_to_json(const ScenarioConfig& cfg) {
    return scenario_to_json_obj(cfg).dump(2);
}

ScenarioConfig scenario_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(Errc::bad_config, std::string("scenario json: ") + e.what());
    }
    try {
        return scenario_from_json_obj(j);
    } catch (const json::exception& e) {
        throw Error(Errc::bad_config, std::string("scenario json: ") + e.what());
    }
}

ScenarioConfig scenario_patched(const ScenarioConfig& cfg, const std::string& patch_json) {
    json base = scenario_to_json_obj(cfg);
    try {
        base.merge_patch(json::parse(patch_json));
        return scenario_from_json_obj(base);
    } catch (const json::exception& e) {
        throw Error(Errc::bad_config, std::string("scenario patch: ") + e.what());
    }
}

std::string experiment_spec_to_json(const ExperimentSpec& spec) {
    json methods = json::array();
    for (const Method& m : spec.methods) methods.push_back(m.name());
    json j{{"scenario", scenario_kind_name(spec.scenario)},
           {"methods", methods},
           {"seeds", spec.seeds},
           {"out_dir", spec.out_dir},
           {"workers", spec.workers}};
    if (!spec.config_patch.empty()) j["config_patch"] = json::parse(spec.config_patch);
    return j.dump(2);
}

ExperimentSpec experiment_spec_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(Errc::bad_config, std::string("experiment spec: ") + e.what());
    }
    ExperimentSpec spec;
    try {
        spec.scenario = scenario_kind_from_name(j.at("scenario").get<std::string>());
        for (const json& m : j.at("methods")) spec.methods.push_back(Method::parse(m.get<std::string>()));
        spec.seeds = j.value("seeds", 30);
        spec.out_dir = j.value("out_dir", std::string{});
        spec.workers = j.value("workers", 1);
        if (j.contains("config_patch")) spec.config_patch = j.at("config_patch").dump();
    } catch (const json::exception& e) {
        throw Error(Errc::bad_config, std::string("experiment spec: ") + e.what());
    }
    if (spec.seeds < 1) throw Error(Errc::bad_config, "experiment spec: seeds < 1");
    if (spec.methods.empty()) throw Error(Errc::bad_config, "experiment spec: no methods");
    return spec;
}

}  // namespace msw
