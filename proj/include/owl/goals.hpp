#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "owl/config.hpp"
#include "owl/types.hpp"

namespace owl {

struct GoalSpec {
    int id = 0;
    std::string name;
    std::string target_type;
    int room = 0;
    std::optional<std::pair<int, int>> anchor;
};

using GoalSeq = std::vector<GoalSpec>;

GoalSeq goals_from_config(const EnvConfig& cfg);

// Vector of goal-predicate truth values. Entries are 0/1 for full states;
// kNone entries are produced only by the world model on partial outcomes.
constexpr int8_t kNone = -1;

struct AbstractState {
    std::vector<int8_t> bits;

    bool has_none() const {
        for (int8_t b : bits)
            if (b == kNone) return true;
        return false;
    }
    bool operator==(const AbstractState&) const = default;
};

// 1 iff the player's box overlaps the target object's box (at least one
// shared cell, edge adjacency does not count) and the rooms match.
int eval_goal(const GoalSpec& g, const SymbolicState& s);

// f(s): one bit per goal, never kNone on a full state.
AbstractState abstract_state(const SymbolicState& s, const GoalSeq& goals);

// R_g(s, a, s') = g(s'). The learner applies the reward multiplier
// separately when pushing into a replay buffer.
double goal_reward(const GoalSpec& g, const SymbolicState& next);

// Manhattan-distance heuristic in [0, 5]: 5 * (1 - dist / 400) with dist
// clamped at 400. If the goal object is not visible in s (other room), 0.
double heuristic(const GoalSpec& g, const SymbolicState& s);

}  // namespace owl
