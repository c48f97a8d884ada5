#pragma once

#include <optional>
#include <string>
#include <vector>

#include "owl/agent.hpp"
#include "owl/baselines.hpp"
#include "owl/proposer.hpp"

namespace owl {

// Exit codes: 0 success, 2 config error, 3 budget exhausted with an
// unmastered goal.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitUnmastered = 3;

struct ExperimentConfig {
    std::string env = "chain6";
    std::string agent = "owl";  // owl | dqn | gc-dqn | hdqn
    uint64_t seed = 0;
    int64_t max_env_steps = 100000;
    bool no_proposer = false;
    std::optional<double> n_threshold_override;
    bool no_world_model = false;
    ProposerConfig proposer;
    std::string out_dir = "out";
    std::string trace_path;
    std::string save_checkpoint_to;
    int wm_train_steps = 1536;
    PoeConfig poe;

    void validate() const;
    OwlOptions owl_options() const;
    std::string metrics_path() const;
};

struct RunResult {
    int exit_code = kExitOk;
    int mastered = 0;
    int64_t env_steps = 0;
    std::string metrics_file;
};

RunResult run_experiment(const ExperimentConfig& cfg);

struct ZeroShotRow {
    int goal_id = -1;
    double random = 0.0;
    double without_bridge = 0.0;
    double with_bridge = 0.0;
};
struct ZeroShotReport {
    bool bridge_mastered = false;
    std::vector<ZeroShotRow> rows;
};

// Loads a trained checkpoint, moves the spawn, trains only the bridging
// option for `bridge_goal`, then evaluates composed execution on the
// downstream goals with no further training.
ZeroShotReport run_zero_shot(const ExperimentConfig& cfg, const std::string& checkpoint_dir,
                             int new_spawn_room, int new_spawn_cx, int new_spawn_cy,
                             int bridge_goal, const std::vector<int>& eval_goals,
                             int episodes, int64_t bridge_budget,
                             const std::string& report_path);

struct ImplicitRow {
    int option_id = -1;
    int goal_id = -1;
    double before = 0.0;  // random-initialization control
    double after = 0.0;
};
struct ImplicitReport {
    std::vector<ImplicitRow> rows;
};

// Loads a trained checkpoint, keeps the world model, reinitializes every
// policy, trains only the top goal, and reports standalone success rates
// before vs after.
ImplicitReport run_implicit(const ExperimentConfig& cfg, const std::string& checkpoint_dir,
                            int top_goal, int episodes, int64_t budget,
                            const std::string& report_path);

// Aggregates options_mastered curves over seeds: step grids are aligned by
// last-value carry-forward before averaging. Writes tab-separated
// step/mean/min/max rows.
int emit_plot_data(const std::vector<std::string>& metrics_files, const std::string& out_path);

// Reads one metrics file back as (env_steps, options_mastered) pairs.
std::vector<std::pair<int64_t, int>> read_mastered_curve(const std::string& path);

}  // namespace owl
