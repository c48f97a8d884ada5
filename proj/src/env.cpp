#include "owl/env.hpp"

#include <json.hpp>

#include <algorithm>

namespace owl {

GridEnv::GridEnv(const EnvConfig& cfg, uint64_t seed) : cfg_(cfg), rng_(seed) {
    cfg_.validate();
    for (const auto& e : cfg_.enemies) enemies_.push_back({e, e.cx, e.cy, 1});
    room_ = cfg_.spawn_room;
    px_ = cfg_.spawn_cx;
    py_ = cfg_.spawn_cy;
}

SymbolicState GridEnv::reset() {
    room_ = cfg_.spawn_room;
    px_ = cfg_.spawn_cx;
    py_ = cfg_.spawn_cy;
    enemies_.clear();
    for (const auto& e : cfg_.enemies) enemies_.push_back({e, e.cx, e.cy, 1});
    steps_ = 0;
    has_reset_ = true;
    rebuild_state();
    return state_;
}

char GridEnv::tile(int room, int cx, int cy) const {
    const RoomGrid& g = cfg_.room(room);
    if (cx < 0 || cy < 0 || cx >= g.width() || cy >= g.height()) return '#';
    return g.at(cx, cy);
}

bool GridEnv::wall_at(int room, int cx, int cy) const { return tile(room, cx, cy) == '#'; }

GridEnv::StepResult GridEnv::step(const std::string& action_label) {
    for (size_t i = 0; i < cfg_.action_set.size(); ++i)
        if (cfg_.action_set[i] == action_label) return step(static_cast<int>(i));
    throw ConfigError("unknown action label '" + action_label + "'");
}

GridEnv::StepResult GridEnv::step(int action) {
    if (!has_reset_) throw std::logic_error("step() before reset()");
    if (action < 0 || action >= action_count())
        throw ConfigError("action index " + std::to_string(action) + " out of range");

    if (cfg_.action_slip > 0.0 && rng_.bernoulli(cfg_.action_slip))
        action = rng_.uniform_int(action_count());

    const std::string& label = cfg_.action_set[action];
    int dx = 0, dy = 0;
    if (label == "UP") dy = -1;
    else if (label == "DOWN") dy = 1;
    else if (label == "LEFT") dx = -1;
    else if (label == "RIGHT") dx = 1;
    // NOOP and any other label keep the player in place.

    if (dx != 0 || dy != 0) {
        int tx = px_ + dx, ty = py_ + dy;
        char t = tile(room_, tx, ty);
        int last_room = static_cast<int>(cfg_.rooms.size()) - 1;
        if (t == '<' && room_ > 0) {
            room_ -= 1;
            px_ = cfg_.room(room_).width() - 2;
            py_ = ty;
        } else if (t == '>' && room_ < last_room) {
            room_ += 1;
            px_ = 1;
            py_ = ty;
        } else if (t == '.') {
            px_ = tx;
            py_ = ty;
        }
        // walls, out-of-grid and dead-end portals block
    }

    for (auto& e : enemies_) {
        int& c = (e.def.axis == 'h') ? e.cx : e.cy;
        int other_x = (e.def.axis == 'h') ? c + e.dir : e.cx;
        int other_y = (e.def.axis == 'h') ? e.cy : c + e.dir;
        int next = c + e.dir;
        if (next < e.def.lo || next > e.def.hi || wall_at(e.def.room, other_x, other_y)) {
            e.dir = -e.dir;
            next = c + e.dir;
            int bx = (e.def.axis == 'h') ? next : e.cx;
            int by = (e.def.axis == 'h') ? e.cy : next;
            if (next < e.def.lo || next > e.def.hi || wall_at(e.def.room, bx, by)) continue;
        }
        c = next;
    }

    ++steps_;
    rebuild_state();
    return {state_, steps_ >= cfg_.episode_timeout};
}

void GridEnv::rebuild_state() {
    const int cs = cfg_.cell_size;
    std::vector<GameObject> objs;
    auto is_static = [&](const std::string& t) { return !cfg_.is_moving_type(t); };

    // Registry order: moving types as declared, then static config objects in
    // declaration order, then portals. Within a type, instance slots follow
    // declaration order. This keeps object ordering deterministic.
    std::vector<std::string> order;
    auto add_type = [&](const std::string& t) {
        if (std::find(order.begin(), order.end(), t) == order.end()) order.push_back(t);
    };
    for (const auto& m : cfg_.moving) add_type(m.type);
    for (const auto& o : cfg_.objects) add_type(o.type);
    add_type("portal_prev");
    add_type("portal_next");

    auto emit = [&](const std::string& type) {
        if (type == "player") {
            objs.push_back({"player", px_ * cs, py_ * cs, cs, cs, is_static("player")});
        } else if (type == "roomnumber") {
            objs.push_back({"roomnumber", room_, 0, 0, 0, is_static("roomnumber")});
        } else if (type == "enemy") {
            for (const auto& e : enemies_)
                if (e.def.room == room_)
                    objs.push_back({"enemy", e.cx * cs, e.cy * cs, cs, cs, is_static("enemy")});
        } else if (type == "portal_prev" || type == "portal_next") {
            const RoomGrid& g = cfg_.room(room_);
            char mark = (type == "portal_prev") ? '<' : '>';
            int col = (type == "portal_prev") ? 0 : g.width() - 1;
            int run_start = -1;
            for (int r = 0; r <= g.height(); ++r) {
                bool hit = r < g.height() && g.at(col, r) == mark;
                if (hit && run_start < 0) run_start = r;
                if (!hit && run_start >= 0) {
                    objs.push_back({type, col * cs, run_start * cs, cs, (r - run_start) * cs, true});
                    run_start = -1;
                }
            }
        } else {
            for (const auto& o : cfg_.objects)
                if (o.type == type && o.room == room_)
                    objs.push_back({type, o.cx * cs, o.cy * cs, o.cw * cs, o.ch * cs, is_static(type)});
        }
    };
    for (const auto& t : order) emit(t);

    state_.objects = std::move(objs);
    state_.room = room_;
}

std::string GridEnv::state_to_json(const SymbolicState& s) {
    nlohmann::json j;
    j["room"] = s.room;
    auto arr = nlohmann::json::array();
    for (const auto& o : s.objects) {
        arr.push_back({{"type", o.type},
                       {"x", o.x},
                       {"y", o.y},
                       {"w", o.w},
                       {"h", o.h},
                       {"static", o.is_static}});
    }
    j["objects"] = arr;
    return j.dump();
}

}  // namespace owl
