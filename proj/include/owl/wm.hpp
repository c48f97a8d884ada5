#pragma once

#include <map>
#include <vector>

#include "owl/poe.hpp"

namespace owl {

// Maps abstract states back to one representative full state each.
// Lookups of unknown keys, or keys containing kNone, yield a partial state
// whose primitive features are all unknown while the abstract features are
// retained.
class WeightingTable {
  public:
    // Insert f(s) -> s; last writer wins for a revisited abstract state.
    void update(const AbstractState& key, const SymbolicState& s);
    SimState lookup(const AbstractState& f) const;
    size_t size() const { return map_.size(); }

    const std::map<std::vector<int8_t>, SymbolicState>& entries() const { return map_; }

  private:
    std::map<std::vector<int8_t>, SymbolicState> map_;
};

struct AbstractWorldModel {
    PoeConfig poe;
    std::map<int, OptionModel> models;  // keyed by option id
    WeightingTable table;

    const OptionModel* model(int option_id) const {
        auto it = models.find(option_id);
        return it == models.end() ? nullptr : &it->second;
    }

    // Structured-text checkpoint; bit-exact round trip.
    std::string serialize() const;
    static AbstractWorldModel deserialize(const std::string& text);
};

// The abstract world model driven as a simulated environment: actions are
// options, episodes run for at most 4 abstract steps, and any expert access
// to an unknown field ends the episode with zero reward.
class SimEnv {
  public:
    static constexpr int kHorizon = 4;

    SimEnv(const AbstractWorldModel& wm, const GoalSeq& goals, int target_goal,
           std::vector<int> option_ids, uint64_t seed);

    // Episodes restart from a state drawn uniformly from the seen-state pool
    // (weighting-table states plus explicitly added reset states).
    void add_reset_state(const SymbolicState& s);
    const std::vector<int>& option_ids() const { return option_ids_; }
    int action_count() const { return static_cast<int>(option_ids_.size()); }
    int target_goal() const { return target_goal_; }

    SimState reset();

    struct StepOut {
        SimState next;
        double reward_raw = 0.0;
        bool done = false;
        bool goal_reached = false;
        bool access_violation = false;
    };
    StepOut step(int action_index);

    const SimState& state() const { return cur_; }
    int steps_this_episode() const { return t_; }

  private:
    const AbstractWorldModel& wm_;
    GoalSeq goals_;
    int target_goal_;
    std::vector<int> option_ids_;
    Rng rng_;
    std::vector<SimState> pool_;
    SimState cur_;
    int t_ = 0;
};

}  // namespace owl
