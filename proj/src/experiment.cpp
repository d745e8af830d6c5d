#include "msw/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <json.hpp>

#include "msw/config.hpp"

namespace msw {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

constexpr const char* kCsvHeader =
    "t,rung,model,ur_steer,ur_accel,uh_steer,uh_accel,"
    "robot_x,robot_y,robot_heading,robot_speed,human_x,human_y,human_heading,human_speed,"
    "reward,meta_reward,plan_seconds,decide_seconds,"
    "decision,candidate_rung,delta_r_meta,reward_estimate,delta_steer,delta_accel,"
    "infl_ss,infl_sa,infl_as,infl_aa,collision,others";

constexpr int kCsvFixedColumns = 31;

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

std::string sanitize(const std::string& name) {
    std::string out = name;
    for (char& c : out)
        if (c == ':' || c == '/' || c == ' ') c = '_';
    return out;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::io, "cannot open for writing: " + path.string());
    f << content;
    if (!f) throw Error(Errc::io, "write failed: " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(Errc::io, "cannot open: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

std::string episode_csv(const EpisodeLog& log) {
    std::ostringstream out;
    out << kCsvHeader << "\n";
    for (const StepRecord& r : log.steps) {
        out << r.t << ',' << r.rung << ',' << model_kind_name(r.kind) << ',' << fmt(r.u_robot.steer)
            << ',' << fmt(r.u_robot.accel) << ',' << fmt(r.u_human.steer) << ','
            << fmt(r.u_human.accel) << ',' << fmt(r.state.robot.x) << ',' << fmt(r.state.robot.y)
            << ',' << fmt(r.state.robot.heading) << ',' << fmt(r.state.robot.speed) << ','
            << fmt(r.state.human.x) << ',' << fmt(r.state.human.y) << ','
            << fmt(r.state.human.heading) << ',' << fmt(r.state.human.speed) << ','
            << fmt(r.realized_reward) << ',' << fmt(r.meta_reward) << ',' << fmt(r.plan_seconds)
            << ',' << fmt(r.decide_seconds) << ',';
        if (r.eval) {
            const SwitchEvaluation& e = *r.eval;
            out << switch_decision_name(e.decision) << ',' << e.candidate_rung << ','
                << fmt(e.delta_r_meta) << ',' << fmt(e.reward_estimate) << ','
                << fmt(e.delta_first.steer) << ',' << fmt(e.delta_first.accel) << ','
                << fmt(e.influence.m[0][0]) << ',' << fmt(e.influence.m[0][1]) << ','
                << fmt(e.influence.m[1][0]) << ',' << fmt(e.influence.m[1][1]);
        } else {
            out << "none,-1,0,0,0,0,0,0,0,0";
        }
        out << ',' << (r.collision ? 1 : 0) << ',';
        // scripted cars, space/semicolon separated inside one cell
        for (int i = 0; i < r.state.others.size(); ++i) {
            const State& o = r.state.others[i];
            if (i) out << ';';
            out << fmt(o.x) << ' ' << fmt(o.y) << ' ' << fmt(o.heading) << ' ' << fmt(o.speed);
        }
        out << "\n";
    }
    return out.str();
}

EpisodeLog episode_from_csv(const std::string& csv, ScenarioKind kind, std::uint64_t seed,
                            const std::string& method) {
    EpisodeLog log;
    log.kind = kind;
    log.seed = seed;
    log.method = method;
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw Error(Errc::io, "episode csv: empty");
    if (line != kCsvHeader) throw Error(Errc::io, "episode csv: unexpected header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> f = split(line, ',');
        if (f.size() != kCsvFixedColumns) throw Error(Errc::io, "episode csv: bad column count");
        StepRecord r;
        r.t = std::stoi(f[0]);
        r.rung = std::stoi(f[1]);
        r.kind = model_kind_from_name(f[2]);
        r.u_robot = Control{std::stod(f[3]), std::stod(f[4])};
        r.u_human = Control{std::stod(f[5]), std::stod(f[6])};
        r.state.robot = State{std::stod(f[7]), std::stod(f[8]), std::stod(f[9]), std::stod(f[10])};
        r.state.human =
            State{std::stod(f[11]), std::stod(f[12]), std::stod(f[13]), std::stod(f[14])};
        r.realized_reward = std::stod(f[15]);
        r.meta_reward = std::stod(f[16]);
        r.plan_seconds = std::stod(f[17]);
        r.decide_seconds = std::stod(f[18]);
        if (f[19] != "none") {
            SwitchEvaluation e;
            if (f[19] == "up") e.decision = SwitchDecision::up;
            else if (f[19] == "down") e.decision = SwitchDecision::down;
            else e.decision = SwitchDecision::stay;
            e.candidate_rung = std::stoi(f[20]);
            e.delta_r_meta = std::stod(f[21]);
            e.reward_estimate = std::stod(f[22]);
            e.delta_first = Control{std::stod(f[23]), std::stod(f[24])};
            e.influence.m[0][0] = std::stod(f[25]);
            e.influence.m[0][1] = std::stod(f[26]);
            e.influence.m[1][0] = std::stod(f[27]);
            e.influence.m[1][1] = std::stod(f[28]);
            r.eval = e;
        }
        r.collision = f[29] == "1";
        if (!f[30].empty()) {
            for (const std::string& cell : split(f[30], ';')) {
                const std::vector<std::string> v = split(cell, ' ');
                if (v.size() != 4) throw Error(Errc::io, "episode csv: bad others cell");
                r.state.others.push_back(
                    State{std::stod(v[0]), std::stod(v[1]), std::stod(v[2]), std::stod(v[3])});
            }
        }

        log.steps.push_back(r);
        log.total_reward += r.realized_reward;
        log.total_meta_reward += r.meta_reward;
        log.total_plan_seconds += r.plan_seconds;
        log.total_decide_seconds += r.decide_seconds;
        log.steps_per_kind[static_cast<std::size_t>(r.kind)] += 1;
        if (r.collision) log.collisions += 1;
    }
    return log;
}

Summary summarize(ScenarioKind scenario, int seeds, const std::vector<EpisodeLog>& logs) {
    Summary s;
    s.scenario = scenario_kind_name(scenario);
    s.seeds = seeds;

    std::vector<std::string> order;
    for (const EpisodeLog& log : logs)
        if (std::find(order.begin(), order.end(), log.method) == order.end())
            order.push_back(log.method);

    for (const std::string& name : order) {
        MethodSummary m;
        m.method = name;
        long steps_total = 0;
        std::array<long, 3> kind_steps{};
        double merge_count = 0.0;
        double lane_step_sum = 0.0;
        for (const EpisodeLog& log : logs) {
            if (log.method != name) continue;
            m.episodes += 1;
            if (log.failed) m.failures += 1;
            m.mean_reward += log.total_reward;
            m.mean_meta_reward += log.total_meta_reward;
            m.mean_plan_seconds += log.total_plan_seconds;
            m.mean_decision_seconds += log.total_decide_seconds;
            steps_total += static_cast<long>(log.steps.size());
            for (int k = 0; k < 3; ++k) kind_steps[static_cast<std::size_t>(k)] += log.steps_per_kind[static_cast<std::size_t>(k)];
            if (log.collisions > 0) m.collisions += 1;
            if (scenario == ScenarioKind::merger) {
                if (merge_complete_step(log) >= 0) merge_count += 1.0;
            }
            if (scenario == ScenarioKind::give_way) {
                const int reach = first_lane_reach_step(log, true, 0.0);
                lane_step_sum += reach >= 0 ? reach : static_cast<int>(log.steps.size());
            }
        }
        if (m.episodes > 0) {
            m.mean_reward /= m.episodes;
            m.mean_meta_reward /= m.episodes;
            m.mean_plan_seconds /= m.episodes;
            m.mean_decision_seconds /= m.episodes;
            m.merge_fraction = merge_count / m.episodes;
            m.mean_human_lane_step = lane_step_sum / m.episodes;
        }
        if (steps_total > 0)
            for (int k = 0; k < 3; ++k)
                m.usage[static_cast<std::size_t>(k)] =
                    static_cast<double>(kind_steps[static_cast<std::size_t>(k)]) /
                    static_cast<double>(steps_total);
        s.methods.push_back(m);
    }
    return s;
}

std::string summary_json(const Summary& s) {
    json methods = json::array();
    for (const MethodSummary& m : s.methods) {
        json usage = json::object();
        for (int k = 0; k < 3; ++k)
            usage[model_kind_name(static_cast<ModelKind>(k))] =
                m.usage[static_cast<std::size_t>(k)];
        json jm{{"method", m.method},
                {"episodes", m.episodes},
                {"failures", m.failures},
                {"mean_reward", m.mean_reward},
                {"mean_meta_reward", m.mean_meta_reward},
                {"mean_plan_seconds", m.mean_plan_seconds},
                {"mean_decision_seconds", m.mean_decision_seconds},
                {"usage", usage},
                {"collisions", m.collisions}};
        if (s.scenario == "merger") jm["merge_fraction"] = m.merge_fraction;
        if (s.scenario == "give_way") jm["mean_human_lane_step"] = m.mean_human_lane_step;
        methods.push_back(jm);
    }
    return json{{"schema_version", s.schema_version},
                {"feature_registry_version", s.feature_registry_version},
                {"scenario", s.scenario},
                {"seeds", s.seeds},
                {"methods", methods}}
        .dump(2);
}

std::string emit_timeseries(const std::vector<EpisodeLog>& logs) {
    if (logs.empty()) throw Error(Errc::invalid_argument, "emit_timeseries: no logs");
    std::size_t max_len = 0;
    for (const EpisodeLog& log : logs) max_len = std::max(max_len, log.steps.size());

    std::ostringstream out;
    out << "t,episodes,mean_plan_seconds,mean_decide_seconds,mean_total_seconds,"
           "usage_naive,usage_turn,usage_tom,mean_rung\n";
    for (std::size_t t = 0; t < max_len; ++t) {
        int count = 0;
        double plan_s = 0.0, decide_s = 0.0, rung = 0.0;
        std::array<int, 3> kinds{};
        for (const EpisodeLog& log : logs) {
            if (t >= log.steps.size()) continue;
            const StepRecord& r = log.steps[t];
            count += 1;
            plan_s += r.plan_seconds;
            decide_s += r.decide_seconds;
            rung += r.rung;
            kinds[static_cast<std::size_t>(r.kind)] += 1;
        }
        if (count == 0) continue;
        out << t << ',' << count << ',' << fmt(plan_s / count) << ',' << fmt(decide_s / count)
            << ',' << fmt((plan_s + decide_s) / count);
        for (int k = 0; k < 3; ++k)
            out << ',' << fmt(static_cast<double>(kinds[static_cast<std::size_t>(k)]) / count);
        out << ',' << fmt(rung / count) << "\n";
    }
    return out.str();
}

Summary run_experiment(const ExperimentSpec& spec) {
    if (spec.seeds < 1) throw Error(Errc::bad_config, "run_experiment: seeds < 1");
    if (spec.methods.empty()) throw Error(Errc::bad_config, "run_experiment: no methods");

    // Build every scenario config up front (deterministic per seed).
    std::vector<ScenarioConfig> configs;
    configs.reserve(static_cast<std::size_t>(spec.seeds));
    for (int seed = 0; seed < spec.seeds; ++seed) {
        ScenarioConfig cfg = build_scenario(spec.scenario, static_cast<std::uint64_t>(seed));
        if (!spec.config_patch.empty()) cfg = scenario_patched(cfg, spec.config_patch);
        configs.push_back(std::move(cfg));
    }

    const std::size_t total =
        spec.methods.size() * static_cast<std::size_t>(spec.seeds);
    std::vector<EpisodeLog> logs(total);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> had_error{false};
    std::string first_error;
    std::mutex error_mutex;

    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total) return;
            const std::size_t mi = i / static_cast<std::size_t>(spec.seeds);
            const std::size_t si = i % static_cast<std::size_t>(spec.seeds);
            try {
                logs[i] = run_episode(configs[si], spec.methods[mi]);
            } catch (const std::exception& e) {
                logs[i].kind = spec.scenario;
                logs[i].seed = si;
                logs[i].method = spec.methods[mi].name();
                logs[i].failed = true;
                logs[i].fail_reason = e.what();
                if (!had_error.exchange(true)) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    first_error = e.what();
                }
            }
        }
    };

    const int workers = std::max(1, spec.workers);
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (std::thread& th : pool) th.join();
    }

    // All episodes of some method failing is a hard error.
    for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
        bool any_ok = false;
        for (int si = 0; si < spec.seeds; ++si)
            if (!logs[mi * static_cast<std::size_t>(spec.seeds) + static_cast<std::size_t>(si)]
                     .failed)
                any_ok = true;
        if (!any_ok)
            throw Error(Errc::runtime, "run_experiment: every episode failed for method " +
                                           spec.methods[mi].name() +
                                           (first_error.empty() ? "" : ": " + first_error));
    }

    const Summary summary = summarize(spec.scenario, spec.seeds, logs);

    if (!spec.out_dir.empty()) {
        const fs::path root(spec.out_dir);
        std::error_code ec;
        fs::create_directories(root, ec);
        if (ec) throw Error(Errc::io, "cannot create out_dir: " + root.string());

        json manifest{{"scenario", scenario_kind_name(spec.scenario)},
                      {"seeds", spec.seeds},
                      {"methods", json::array()}};
        for (std::size_t mi = 0; mi < spec.methods.size(); ++mi) {
            const std::string name = spec.methods[mi].name();
            const std::string dir = sanitize(name);
            fs::create_directories(root / dir, ec);
            if (ec) throw Error(Errc::io, "cannot create method dir");
            manifest["methods"].push_back({{"name", name}, {"dir", dir}});

            std::vector<EpisodeLog> method_logs;
            for (int si = 0; si < spec.seeds; ++si) {
                const EpisodeLog& log =
                    logs[mi * static_cast<std::size_t>(spec.seeds) + static_cast<std::size_t>(si)];
                char fname[64];
                std::snprintf(fname, sizeof fname, "seed_%03d.csv", si);
                write_file(root / dir / fname, episode_csv(log));
                method_logs.push_back(log);
            }
            write_file(root / ("timeseries_" + dir + ".csv"), emit_timeseries(method_logs));
        }
        write_file(root / "manifest.json", manifest.dump(2));
        write_file(root / "summary.json", summary_json(summary));
        write_file(root / "spec.json", experiment_spec_to_json(spec));
    }
    return summary;
}

Summary replay(const std::string& out_dir) {
    const fs::path root(out_dir);
    const json manifest = json::parse(read_file(root / "manifest.json"));
    const ScenarioKind scenario = scenario_kind_from_name(manifest.at("scenario").get<std::string>());
    const int seeds = manifest.at("seeds").get<int>();

    std::vector<EpisodeLog> logs;
    for (const json& m : manifest.at("methods")) {
        const std::string name = m.at("name").get<std::string>();
        const std::string dir = m.at("dir").get<std::string>();
        for (int si = 0; si < seeds; ++si) {
            char fname[64];
            std::snprintf(fname, sizeof fname, "seed_%03d.csv", si);
            logs.push_back(episode_from_csv(read_file(root / dir / fname), scenario,
                                            static_cast<std::uint64_t>(si), name));
        }
    }
    return summarize(scenario, seeds, logs);
}

double calibrate_t_base(int samples) {
    if (samples < 1) throw Error(Errc::invalid_argument, "calibrate: samples < 1");
    const ScenarioConfig cfg = build_scenario(ScenarioKind::stay_back, 0);
    const ModelSpec spec{ModelKind::naive, cfg.t_base, 0};
    std::vector<double> times;
    times.reserve(static_cast<std::size_t>(samples) + 2);
    for (int i = 0; i < samples + 2; ++i) {
        WarmStart warm;
        const Plan p = plan(cfg.initial, spec, cfg.ctx, &warm, 0);
        times.push_back(p.plan_seconds);
    }
    times.erase(times.begin(), times.begin() + 2);  // warm the caches
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
}

}  // namespace msw
