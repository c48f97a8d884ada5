#pragma once

#include <functional>
#include <map>

#include "owl/encoder.hpp"
#include "owl/options.hpp"

namespace owl {

// One option-level decision: the child (primitive or sub-option) ran from
// raw_s to the state where enc_s2 was taken, and the reward is the owning
// option's own goal evaluated there.
struct StepRecord {
    std::vector<float> enc_s, enc_s2;
    float h_s = 0.0f, h_s2 = 0.0f;
    SymbolicState raw_s;
    AbstractState f_s, f_s2;
    int action = 0;
    double reward_raw = 0.0;
    bool sub_option = false;
    int sub_option_id = -1;
};

// Mutable call-and-return execution record of one option.
struct ExecState {
    OptionDef* opt = nullptr;
    ExecState* child = nullptr;
    SymbolicState u;  // child start state
    std::vector<float> enc_u;
    float h_u = 0.0f;
    AbstractState f_u;
    int pending_action = -1;  // decision awaiting its observation
    std::vector<StepRecord> D;
    int t = 0;
    SymbolicState episode_start;
    AbstractState f_episode_start;
    bool episode_start_set = false;

    bool active() const {
        return t > 0 || child != nullptr || pending_action >= 0 || !D.empty();
    }
};

struct TraceEvent {
    int64_t env_step = 0;
    int depth = 0;
    int option_id = 0;
    int action = 0;
    double reward = 0.0;
    bool option_done = false;
    bool flushed = false;
};

struct ExecContext {
    const GoalSeq* goals = nullptr;
    const ObservationEncoder* encoder = nullptr;
    std::function<OptionDef*(int)> lookup;  // option id -> definition
    double n_threshold = 20000.0;
    double delta_threshold = 0.5;
    int max_t = 100;
    TrainConfig train;
    Rng* rng = nullptr;
    bool learning = true;  // false: execute only, record nothing
    bool capture_model_data = true;
    std::function<void(const TraceEvent&)> trace;
    int64_t env_step = 0;
};

// Execution tree of one rollout worker: a persistent per-option execution
// state pool plus the root (target option) record. Each environment step is
// one execute() returning exactly one primitive action, followed by one
// receive() with the resulting state.
class ExecTree {
  public:
    ExecTree(ExecContext* ctx, OptionDef* target) : ctx_(ctx) { root_.opt = target; }

    int execute(const SymbolicState& s, const EncodedObservation& enc_s);

    // Returns whether the root option finished on this observation.
    bool receive(const SymbolicState& s2, const EncodedObservation& enc_s2);

    // Environment reset path: completes every still-active execution record
    // (attached or orphaned) against the final state.
    void force_finish(const SymbolicState& s2, const EncodedObservation& enc_s2);

    ExecState& root() { return root_; }
    ExecState& state_of(int option_id);
    const std::map<int, ExecState>& pool() const { return pool_; }

  private:
    bool receive_rec(ExecState& w, const SymbolicState& s2, const EncodedObservation& enc_s2,
                     bool force, int depth);
    void flush(ExecState& w, bool success_at_end, const SymbolicState& s2);
    const GoalSpec& goal_of(const OptionDef& o) const {
        return (*ctx_->goals)[static_cast<size_t>(o.goal_id)];
    }

    ExecContext* ctx_;
    ExecState root_;
    std::map<int, ExecState> pool_;
};

}  // namespace owl
