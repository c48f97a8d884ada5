#include "owl/goals.hpp"

#include <algorithm>
#include <cmath>

namespace owl {

GoalSeq goals_from_config(const EnvConfig& cfg) {
    GoalSeq out;
    for (size_t i = 0; i < cfg.goals.size(); ++i) {
        const auto& g = cfg.goals[i];
        out.push_back({static_cast<int>(i), g.name, g.target_type, g.room, g.anchor});
    }
    return out;
}

namespace {

const GameObject* find_target(const GoalSpec& g, const SymbolicState& s) {
    for (const auto& o : s.objects) {
        if (o.type != g.target_type) continue;
        if (g.anchor && (o.x != g.anchor->first || o.y != g.anchor->second)) continue;
        return &o;
    }
    return nullptr;
}

}  // namespace

int eval_goal(const GoalSpec& g, const SymbolicState& s) {
    if (s.room != g.room) return 0;
    const GameObject* player = s.find("player");
    const GameObject* target = find_target(g, s);
    if (!player || !target) return 0;
    return boxes_overlap(*player, *target) ? 1 : 0;
}

AbstractState abstract_state(const SymbolicState& s, const GoalSeq& goals) {
    AbstractState a;
    a.bits.reserve(goals.size());
    for (const auto& g : goals) a.bits.push_back(static_cast<int8_t>(eval_goal(g, s)));
    return a;
}

double goal_reward(const GoalSpec& g, const SymbolicState& next) {
    return static_cast<double>(eval_goal(g, next));
}

double heuristic(const GoalSpec& g, const SymbolicState& s) {
    if (s.room != g.room) return 0.0;
    const GameObject* player = s.find("player");
    const GameObject* target = find_target(g, s);
    if (!player || !target) return 0.0;
    double dist = std::abs(player->x - target->x) + std::abs(player->y - target->y);
    dist = std::min(dist, 400.0);
    return 5.0 * (1.0 - dist / 400.0);
}

}  // namespace owl
