#pragma once

#include <functional>
#include <memory>
#include <set>

#include "owl/encoder.hpp"
#include "owl/env.hpp"
#include "owl/exec.hpp"
#include "owl/proposer.hpp"
#include "owl/wm.hpp"
#include "owl/wm_policy.hpp"

namespace owl {

struct OwlOptions {
    TrainConfig train;
    WmTrainConfig wm_train;
    PoeConfig poe;
    double n_threshold = 20000.0;
    double delta_threshold = 0.5;
    int max_t = 100;
    int64_t anneal_samples = 10000;
    int n_steps_per_sample = 1;
    int workers = 4;
    bool use_world_model = true;
    bool use_proposer = true;
    bool epsilon_enabled = true;  // false: every mixture weight forced to 0
    uint64_t seed = 0;
    int checkpoint_every_rounds = 0;  // 0: never
    std::string checkpoint_dir;
};

struct MetricsRow {
    int64_t env_steps = 0;
    int options_mastered = 0;
    int current_goal = -1;
    double epsilon = 0.0;
    struct OptRow {
        int id, goal_id;
        int64_t n_samples;
        double delta, epsilon;
    };
    std::vector<OptRow> options;
};
using MetricsSink = std::function<void(const MetricsRow&)>;

struct StabilitySets {
    std::vector<int> members, stable, good;  // option ids
};

// Alg-style set construction with strict comparisons:
// stable: n_o > n or delta_o > delta; good: delta_o > delta.
StabilitySets stability_sets(const std::vector<std::unique_ptr<OptionDef>>& options, int goal,
                             double n_threshold, double delta_threshold);

// Joint learner: owns the option set, the abstract world model, the
// per-option datasets, and the goal sequence; learns one target option per
// goal with the hierarchical loop. The hierarchical-DQN baseline is this
// agent with the world model, proposer, and mixture weight disabled.
class Agent {
  public:
    Agent(EnvConfig env_cfg, OwlOptions opts, Proposer* proposer);

    // Runs the outer loop for one goal until mastered or the shared step
    // budget is exhausted. On mastery the target joins the option set and
    // its model joins the world model.
    bool learn_option(int goal_id, int64_t max_total_env_steps);

    int64_t env_steps() const { return env_steps_; }
    int mastered_count() const { return static_cast<int>(mastered_goals_.size()); }
    bool goal_mastered(int goal_id) const { return mastered_goals_.count(goal_id) > 0; }
    const GoalSeq& goals() const { return goals_; }
    const EnvConfig& env_config() const { return env_cfg_; }
    const ObservationEncoder& encoder() const { return encoder_; }
    std::vector<std::unique_ptr<OptionDef>>& options() { return options_; }
    AbstractWorldModel& wm() { return wm_; }
    const OwlOptions& opts() const { return opts_; }

    void set_metrics_sink(MetricsSink sink) { metrics_ = std::move(sink); }
    void set_trace_sink(std::function<void(const TraceEvent&)> sink) { trace_ = std::move(sink); }
    void set_env_trace(std::ostream* os) { env_trace_ = os; }

    // Greedy standalone execution of one option from environment reset;
    // returns the success rate over `episodes`. Nothing is recorded and all
    // mixture weights are held at zero for the evaluation.
    double eval_option_success(int option_id, int episodes);

    // Receding-horizon execution for the zero-shot protocol: at every root
    // decision the option chosen greedily by a policy trained in the world
    // model is executed to completion. Returns the completion rate.
    double eval_planned_goal(int goal_id, const std::vector<int>& option_ids, int episodes);

    // Uniform-random primitive baseline completion rate.
    double eval_random_goal(int goal_id, int episodes);

    // Implicit-learning protocol support: random policies, cleared
    // statistics, annealing restarted; the world model is kept.
    void reinitialize_policies();

    // Moves the environment spawn (zero-shot protocol).
    void override_spawn(int room, int cx, int cy);

    void save_checkpoint(const std::string& dir) const;
    static std::unique_ptr<Agent> load_checkpoint(const std::string& dir, OwlOptions opts,
                                                  Proposer* proposer);

    // Fit every option model with data that arrived since its last fit;
    // proposes success-expert preconditions for options that gained their
    // first positive examples. Returns whether any fit saw new positives.
    bool refit_world_model();

    std::unique_ptr<OptionDef> make_option(int goal_id, std::optional<int> precondition_goal,
                                           uint64_t seed);
    void adopt_option(std::unique_ptr<OptionDef> opt, std::vector<Precondition> model_proposals);

  private:
    struct Worker {
        std::unique_ptr<GridEnv> env;
        FrameHistory hist{1};
        SymbolicState cur;
        std::unique_ptr<ExecTree> tree;
    };

    void maybe_hypothesize(int goal_id, OptionDef& target, bool& wm_dirty);
    void retrain_wm_policy(OptionDef& target);
    void rollout_round(std::vector<Worker>& workers, int goal_id, int steps);
    void train_pending_options(OptionDef& target);
    void emit_metrics(int goal_id, const OptionDef& target);
    std::vector<SymbolicState> states_per_room() const;
    std::string goal_description(const GoalSpec& g) const;
    OptionDef* lookup(int id);

    EnvConfig env_cfg_;
    OwlOptions opts_;
    Proposer* proposer_;
    GoalSeq goals_;
    ObservationEncoder encoder_;
    std::vector<std::unique_ptr<OptionDef>> options_;
    AbstractWorldModel wm_;
    std::set<int> mastered_goals_;
    SymbolicState spawn_state_;
    int64_t env_steps_ = 0;
    int next_option_id_ = 0;
    int64_t wm_retrain_counter_ = 0;
    Rng rng_policy_, rng_train_;
    MetricsSink metrics_;
    std::function<void(const TraceEvent&)> trace_;
    std::ostream* env_trace_ = nullptr;
    ExecContext exec_ctx_;
};

}  // namespace owl
