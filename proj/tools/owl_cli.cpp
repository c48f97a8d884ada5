#include <CLI11.hpp>

#include <iostream>

#include "owl/harness.hpp"
#include "owl/serialize.hpp"

namespace {

void add_proposer_flags(CLI::App* cmd, owl::ProposerConfig& pc, std::string& backend) {
    cmd->add_option("--proposer", backend, "proposal backend: llm, stub or replay")
        ->check(CLI::IsMember({"llm", "stub", "replay"}));
    cmd->add_option("--llm-endpoint", pc.endpoint, "chat completion endpoint, e.g. https://host");
    cmd->add_option("--llm-path", pc.path, "endpoint path");
    cmd->add_option("--llm-model", pc.model, "model name");
    cmd->add_option("--llm-temperature", pc.temperature, "sampling temperature");
    cmd->add_option("--llm-retries", pc.max_retries, "parse/transport retries before stub fallback");
    cmd->add_option("--replay-dir", pc.replay_dir, "directory of recorded proposal replies");
}

owl::ProposerConfig::Backend backend_from(const std::string& name) {
    if (name == "llm") return owl::ProposerConfig::Backend::Llm;
    if (name == "replay") return owl::ProposerConfig::Backend::Replay;
    return owl::ProposerConfig::Backend::Stub;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"owl: hierarchical option learning with an abstract world model"};
    app.require_subcommand(1);

    owl::ExperimentConfig cfg;
    std::string proposer_backend = "stub";

    auto* run = app.add_subcommand("run", "train an agent on an environment's goal sequence");
    run->add_option("--env", cfg.env, "environment name or config path");
    run->add_option("--agent", cfg.agent, "owl, dqn, gc-dqn or hdqn")
        ->check(CLI::IsMember({"owl", "dqn", "gc-dqn", "hdqn"}));
    run->add_option("--seed", cfg.seed, "master seed");
    run->add_option("--max-env-steps", cfg.max_env_steps, "environment step budget");
    run->add_flag("--no-proposer", cfg.no_proposer, "disable sub-option hypothesizing");
    run->add_flag("--no-world-model", cfg.no_world_model, "disable the abstract world model");
    double n_thr = -1.0;
    run->add_option("--n-threshold", n_thr, "stability sample threshold override");
    run->add_option("--out", cfg.out_dir, "output directory for metrics");
    run->add_option("--trace", cfg.trace_path, "write per-step states as JSON lines");
    run->add_option("--save-checkpoint", cfg.save_checkpoint_to, "checkpoint directory");
    run->add_option("--wm-steps", cfg.wm_train_steps, "simulated steps per world-model policy training");
    run->add_flag("--appendix-change-priors", cfg.poe.appendix_change_priors,
                  "use the alternative prior for set-1/set-0 experts");
    add_proposer_flags(run, cfg.proposer, proposer_backend);

    auto* zs = app.add_subcommand("zero-shot", "bridge a new spawn into a trained option set");
    std::string checkpoint;
    int zs_room = 0, zs_cx = 10, zs_cy = 7, bridge_goal = 0, episodes = 100;
    int64_t bridge_budget = 40000;
    std::vector<int> eval_goals{1, 2, 3};
    std::string report_path = "zero_shot.csv";
    zs->add_option("--env", cfg.env);
    zs->add_option("--checkpoint", checkpoint)->required();
    zs->add_option("--room", zs_room, "new spawn room");
    zs->add_option("--x", zs_cx, "new spawn cell x");
    zs->add_option("--y", zs_cy, "new spawn cell y");
    zs->add_option("--bridge-goal", bridge_goal, "goal id of the bridging option");
    zs->add_option("--goals", eval_goals, "downstream goal ids");
    zs->add_option("--episodes", episodes, "episodes per completion-rate cell");
    zs->add_option("--bridge-budget", bridge_budget, "env steps for bridge training");
    zs->add_option("--seed", cfg.seed);
    zs->add_option("--wm-steps", cfg.wm_train_steps);
    zs->add_option("--out", report_path, "report csv path");
    add_proposer_flags(zs, cfg.proposer, proposer_backend);

    auto* imp = app.add_subcommand("implicit", "reinitialize policies and train only a top goal");
    int top_goal = 3;
    int64_t imp_budget = 60000;
    std::string imp_report = "implicit.csv";
    imp->add_option("--env", cfg.env);
    imp->add_option("--checkpoint", checkpoint)->required();
    imp->add_option("--top-goal", top_goal);
    imp->add_option("--episodes", episodes);
    imp->add_option("--budget", imp_budget, "env steps for top-goal training");
    imp->add_option("--seed", cfg.seed);
    imp->add_option("--wm-steps", cfg.wm_train_steps);
    imp->add_option("--out", imp_report, "report csv path");
    add_proposer_flags(imp, cfg.proposer, proposer_backend);

    auto* plot = app.add_subcommand("plot", "aggregate metrics files into a plot-ready series");
    std::vector<std::string> metrics_files;
    std::string plot_out = "curve.tsv";
    plot->add_option("files", metrics_files, "metrics csv files")->required();
    plot->add_option("--out", plot_out, "output tsv path");

    auto* inspect = app.add_subcommand("inspect-model", "print a world-model checkpoint");
    std::string wm_path;
    inspect->add_option("path", wm_path, "wm.txt file or checkpoint directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.proposer.backend = backend_from(proposer_backend);
        if (run->parsed()) {
            if (n_thr >= 0.0) cfg.n_threshold_override = n_thr;
            auto result = owl::run_experiment(cfg);
            std::cout << "agent=" << cfg.agent << " seed=" << cfg.seed
                      << " mastered=" << result.mastered << " env_steps=" << result.env_steps
                      << " metrics=" << result.metrics_file << "\n";
            return result.exit_code;
        }
        if (zs->parsed()) {
            auto report = owl::run_zero_shot(cfg, checkpoint, zs_room, zs_cx, zs_cy, bridge_goal,
                                             eval_goals, episodes, bridge_budget, report_path);
            std::cout << "bridge_mastered=" << (report.bridge_mastered ? 1 : 0) << "\n";
            for (const auto& r : report.rows)
                std::cout << "goal " << r.goal_id << ": random=" << r.random
                          << " without_bridge=" << r.without_bridge
                          << " with_bridge=" << r.with_bridge << "\n";
            return owl::kExitOk;
        }
        if (imp->parsed()) {
            auto report = owl::run_implicit(cfg, checkpoint, top_goal, episodes, imp_budget,
                                            imp_report);
            for (const auto& r : report.rows)
                std::cout << "option " << r.option_id << " (goal " << r.goal_id
                          << "): before=" << r.before << " after=" << r.after << "\n";
            return owl::kExitOk;
        }
        if (plot->parsed()) return owl::emit_plot_data(metrics_files, plot_out);
        if (inspect->parsed()) {
            std::string path = wm_path;
            if (std::filesystem::is_directory(path)) path += "/wm.txt";
            std::ifstream f(path, std::ios::binary);
            if (!f) throw owl::ConfigError("cannot open " + path);
            std::stringstream ss;
            ss << f.rdbuf();
            auto wm = owl::AbstractWorldModel::deserialize(ss.str());
            std::cout << "eta=" << wm.poe.eta << " options=" << wm.models.size()
                      << " table_rows=" << wm.table.size() << "\n";
            for (const auto& [id, m] : wm.models) {
                std::cout << "option " << id << " target_feature=" << m.target_feature << "\n";
                for (const auto& e : m.success)
                    std::cout << "  success theta=" << e.theta << " mu=" << e.mu
                              << " sigma=" << e.sigma << " "
                              << (e.condition ? e.condition->to_string() : "(blanket)") << "\n";
            }
            return owl::kExitOk;
        }
    } catch (const owl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return owl::kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return owl::kExitOk;
}
