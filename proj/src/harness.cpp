#include "owl/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace owl {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void write_metrics_row(std::ofstream& f, const MetricsRow& row) {
    f << row.env_steps << "," << row.options_mastered << "," << row.current_goal << ","
      << fmt(row.epsilon) << ",";
    for (size_t i = 0; i < row.options.size(); ++i) {
        const auto& o = row.options[i];
        if (i) f << "|";
        f << o.id << "=" << o.goal_id << ":" << o.n_samples << ":" << fmt(o.delta) << ":"
          << fmt(o.epsilon);
    }
    f << "\n";
}

}  // namespace

void ExperimentConfig::validate() const {
    if (agent != "owl" && agent != "dqn" && agent != "gc-dqn" && agent != "hdqn")
        throw ConfigError("unknown agent '" + agent + "'");
    bool is_owl = agent == "owl";
    if ((no_proposer || no_world_model) && !is_owl)
        throw ConfigError("ablations are only valid for agent=owl");
    if (n_threshold_override && !(is_owl || agent == "hdqn"))
        throw ConfigError("n_threshold override is only valid for owl or hdqn");
    if (max_env_steps <= 0) throw ConfigError("max_env_steps must be positive");
}

OwlOptions ExperimentConfig::owl_options() const {
    OwlOptions o;
    o.seed = seed;
    o.poe = poe;
    o.wm_train.total_steps = wm_train_steps;
    if (agent == "hdqn") {
        o.use_world_model = false;
        o.use_proposer = false;
        o.epsilon_enabled = false;
    } else {
        o.use_world_model = !no_world_model;
        o.use_proposer = !no_proposer;
        o.epsilon_enabled = true;
    }
    if (n_threshold_override) o.n_threshold = *n_threshold_override;
    return o;
}

std::string ExperimentConfig::metrics_path() const {
    return out_dir + "/" + agent + "_seed" + std::to_string(seed) + ".csv";
}

RunResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    EnvConfig env_cfg = load_env_config(cfg.env);
    GoalSeq goals = goals_from_config(env_cfg);
    if (goals.empty()) throw ConfigError("environment has no goals to learn");

    std::filesystem::create_directories(cfg.out_dir);
    RunResult result;
    result.metrics_file = cfg.metrics_path();
    std::ofstream mf(result.metrics_file, std::ios::binary);
    mf << "env_steps,options_mastered,current_goal,epsilon,option_stats\n";
    MetricsSink sink = [&](const MetricsRow& row) { write_metrics_row(mf, row); };

    std::ofstream trace;
    if (!cfg.trace_path.empty()) trace.open(cfg.trace_path, std::ios::binary);

    if (cfg.agent == "dqn" || cfg.agent == "gc-dqn") {
        FlatOptions fo;
        fo.goal_conditioned = cfg.agent == "gc-dqn";
        fo.seed = cfg.seed;
        auto r = run_flat_agent(env_cfg, fo, cfg.max_env_steps, sink);
        result.mastered = r.mastered;
        result.env_steps = r.env_steps;
        result.exit_code =
            r.mastered == static_cast<int>(goals.size()) ? kExitOk : kExitUnmastered;
        return result;
    }

    Proposer proposer(cfg.proposer, &env_cfg, &goals);
    Agent agent(env_cfg, cfg.owl_options(), &proposer);
    agent.set_metrics_sink(sink);
    if (trace.is_open()) agent.set_env_trace(&trace);

    bool all = true;
    for (size_t g = 0; g < goals.size(); ++g) {
        if (agent.env_steps() >= cfg.max_env_steps) {
            all = false;
            break;
        }
        bool ok = agent.learn_option(static_cast<int>(g), cfg.max_env_steps);
        all = all && ok;
    }
    if (!cfg.save_checkpoint_to.empty()) agent.save_checkpoint(cfg.save_checkpoint_to);
    result.mastered = agent.mastered_count();
    result.env_steps = agent.env_steps();
    result.exit_code = all ? kExitOk : kExitUnmastered;
    return result;
}

ZeroShotReport run_zero_shot(const ExperimentConfig& cfg, const std::string& checkpoint_dir,
                             int new_spawn_room, int new_spawn_cx, int new_spawn_cy,
                             int bridge_goal, const std::vector<int>& eval_goals,
                             int episodes, int64_t bridge_budget,
                             const std::string& report_path) {
    EnvConfig probe = load_env_config(cfg.env);
    GoalSeq goals = goals_from_config(probe);
    Proposer proposer(cfg.proposer, &probe, &goals);
    auto agent = Agent::load_checkpoint(checkpoint_dir, cfg.owl_options(), &proposer);
    agent->override_spawn(new_spawn_room, new_spawn_cx, new_spawn_cy);

    ZeroShotReport report;
    std::vector<int> base_ids;
    for (const auto& o : agent->options()) base_ids.push_back(o->id);

    for (int g : eval_goals) {
        ZeroShotRow row;
        row.goal_id = g;
        row.random = agent->eval_random_goal(g, episodes);
        row.without_bridge = agent->eval_planned_goal(g, base_ids, episodes);
        report.rows.push_back(row);
    }

    report.bridge_mastered =
        agent->learn_option(bridge_goal, agent->env_steps() + bridge_budget);
    std::vector<int> with_bridge_ids;
    for (const auto& o : agent->options()) with_bridge_ids.push_back(o->id);
    for (auto& row : report.rows)
        row.with_bridge = agent->eval_planned_goal(row.goal_id, with_bridge_ids, episodes);

    if (!report_path.empty()) {
        std::ofstream f(report_path, std::ios::binary);
        f << "goal_id,random,without_bridge,with_bridge\n";
        for (const auto& r : report.rows)
            f << r.goal_id << "," << fmt(r.random) << "," << fmt(r.without_bridge) << ","
              << fmt(r.with_bridge) << "\n";
    }
    return report;
}

ImplicitReport run_implicit(const ExperimentConfig& cfg, const std::string& checkpoint_dir,
                            int top_goal, int episodes, int64_t budget,
                            const std::string& report_path) {
    EnvConfig probe = load_env_config(cfg.env);
    GoalSeq goals = goals_from_config(probe);
    OwlOptions opts = cfg.owl_options();
    opts.use_proposer = false;  // reuse the loaded option set unmodified
    Proposer proposer(cfg.proposer, &probe, &goals);
    auto agent = Agent::load_checkpoint(checkpoint_dir, opts, &proposer);

    agent->reinitialize_policies();
    ImplicitReport report;
    for (const auto& o : agent->options())
        report.rows.push_back({o->id, o->goal_id,
                               agent->eval_option_success(o->id, episodes), 0.0});

    agent->learn_option(top_goal, agent->env_steps() + budget);

    for (auto& row : report.rows) row.after = agent->eval_option_success(row.option_id, episodes);

    if (!report_path.empty()) {
        std::ofstream f(report_path, std::ios::binary);
        f << "option_id,goal_id,before,after\n";
        for (const auto& r : report.rows)
            f << r.option_id << "," << r.goal_id << "," << fmt(r.before) << "," << fmt(r.after)
              << "\n";
    }
    return report;
}

std::vector<std::pair<int64_t, int>> read_mastered_curve(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open metrics file " + path);
    std::vector<std::pair<int64_t, int>> out;
    std::string line;
    std::getline(f, line);  // header
    while (std::getline(f, line)) {
        std::istringstream is(line);
        std::string steps, mastered;
        if (!std::getline(is, steps, ',') || !std::getline(is, mastered, ',')) continue;
        out.push_back({std::stoll(steps), std::stoi(mastered)});
    }
    return out;
}

int emit_plot_data(const std::vector<std::string>& metrics_files, const std::string& out_path) {
    std::vector<std::vector<std::pair<int64_t, int>>> curves;
    std::vector<int64_t> grid;
    for (const auto& p : metrics_files) {
        curves.push_back(read_mastered_curve(p));
        for (const auto& [s, m] : curves.back()) grid.push_back(s);
    }
    if (curves.empty()) throw ConfigError("no metrics files given");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

    std::ofstream f(out_path, std::ios::binary);
    f << "env_steps\tmean\tmin\tmax\n";
    for (int64_t s : grid) {
        double sum = 0.0;
        int lo = 1 << 30, hi = -1;
        for (const auto& c : curves) {
            int v = 0;  // carry the last value at or before s forward
            for (const auto& [cs, cm] : c) {
                if (cs > s) break;
                v = cm;
            }
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        f << s << "\t" << fmt(sum / static_cast<double>(curves.size())) << "\t" << lo << "\t"
          << hi << "\n";
    }
    return kExitOk;
}

}  // namespace owl
