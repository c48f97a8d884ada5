#pragma once

#include <string>
#include <vector>

#include "owl/config.hpp"
#include "owl/types.hpp"

namespace owl {

// Multi-room symbolic gridworld. Movement is 4-directional on a cell grid,
// walls block, side portals move the player one room left/right. Objects are
// reported in pixel coordinates (cell * cell_size).
//
// A single instance is not shared across concurrent callers; drive one
// instance per rollout worker.
class GridEnv {
  public:
    GridEnv(const EnvConfig& cfg, uint64_t seed);

    // Returns the configured spawn state and zeroes the step counter.
    SymbolicState reset();

    struct StepResult {
        SymbolicState state;
        bool timeout = false;
    };
    // Applies one primitive action by label index into cfg.action_set.
    StepResult step(int action);
    StepResult step(const std::string& action_label);

    const SymbolicState& state() const { return state_; }
    const EnvConfig& config() const { return cfg_; }
    int steps_taken() const { return steps_; }
    int action_count() const { return static_cast<int>(cfg_.action_set.size()); }

    // Line-delimited JSON dump of a state, for --trace debugging.
    static std::string state_to_json(const SymbolicState& s);

  private:
    struct Enemy {
        EnemyDef def;
        int cx, cy;
        int dir = 1;
    };

    void rebuild_state();
    bool wall_at(int room, int cx, int cy) const;
    char tile(int room, int cx, int cy) const;

    EnvConfig cfg_;
    Rng rng_;
    int room_, px_, py_;  // player cell position
    std::vector<Enemy> enemies_;
    int steps_ = 0;
    bool has_reset_ = false;
    SymbolicState state_;
};

}  // namespace owl
