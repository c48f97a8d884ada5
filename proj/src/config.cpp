#include "owl/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace owl {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

int to_int(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("expected integer for " + what + ", got '" + s + "'");
    }
}

double to_double(const std::string& s, const std::string& what) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("expected number for " + what + ", got '" + s + "'");
    }
}

bool is_grid_row(const std::string& line) {
    if (line.empty()) return false;
    for (char c : line)
        if (c != '#' && c != '.' && c != '<' && c != '>') return false;
    return true;
}

}  // namespace

const RoomGrid& EnvConfig::room(int idx) const {
    for (const auto& r : rooms)
        if (r.index == idx) return r;
    throw ConfigError("no room with index " + std::to_string(idx));
}

bool EnvConfig::is_moving_type(const std::string& type) const {
    for (const auto& m : moving)
        if (m.type == type) return true;
    return false;
}

int EnvConfig::moving_max(const std::string& type) const {
    for (const auto& m : moving)
        if (m.type == type) return m.max_count;
    return 0;
}

void EnvConfig::validate() const {
    if (rooms.empty()) throw ConfigError(name + ": no rooms defined");
    if (episode_timeout <= 0) throw ConfigError(name + ": episode_timeout must be > 0");
    if (frame_stack <= 0) throw ConfigError(name + ": frame_stack must be > 0");
    if (action_set.empty()) throw ConfigError(name + ": empty action set");
    int w = rooms[0].width(), h = rooms[0].height();
    for (const auto& r : rooms) {
        if (r.width() != w || r.height() != h)
            throw ConfigError(name + ": all rooms must share one grid size");
        for (const auto& row : r.rows)
            if (static_cast<int>(row.size()) != w)
                throw ConfigError(name + ": ragged grid in room " + std::to_string(r.index));
    }
    std::vector<int> idx;
    for (const auto& r : rooms) idx.push_back(r.index);
    std::sort(idx.begin(), idx.end());
    for (size_t i = 0; i < idx.size(); ++i)
        if (idx[i] != static_cast<int>(i))
            throw ConfigError(name + ": room indices must be contiguous from 0");

    const RoomGrid& sp = room(spawn_room);
    if (spawn_cx <= 0 || spawn_cy <= 0 || spawn_cx >= sp.width() - 1 || spawn_cy >= sp.height() - 1 ||
        sp.at(spawn_cx, spawn_cy) == '#')
        throw ConfigError(name + ": spawn is not inside a room");

    for (const auto& o : objects) {
        if (o.room < 0 || o.room >= static_cast<int>(rooms.size()))
            throw ConfigError(name + ": object " + o.type + " in unknown room");
        if (o.cw < 0 || o.ch < 0) throw ConfigError(name + ": negative object extent");
    }
    for (const auto& g : goals) {
        bool found = false;
        for (const auto& o : objects)
            if (o.type == g.target_type && o.room == g.room) found = true;
        if (!found)
            throw ConfigError(name + ": goal " + g.name + " references missing object " +
                              g.target_type + " in room " + std::to_string(g.room));
    }
    for (const auto& e : enemies) {
        if (e.room < 0 || e.room >= static_cast<int>(rooms.size()))
            throw ConfigError(name + ": enemy in unknown room");
        if (e.axis != 'h' && e.axis != 'v') throw ConfigError(name + ": enemy axis must be h or v");
        if (e.lo > e.hi) throw ConfigError(name + ": enemy patrol bounds inverted");
    }
}

EnvConfig parse_env_config(const std::string& text) {
    EnvConfig cfg;
    cfg.source_text = text;
    std::istringstream is(text);
    std::string line;
    RoomGrid* open_room = nullptr;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (open_room && is_grid_row(line)) {
            open_room->rows.push_back(line);
            continue;
        }
        std::string stripped = line;
        auto hash = stripped.find('#');
        // '#' only starts a comment outside grid rows
        if (hash != std::string::npos) stripped = stripped.substr(0, hash);
        auto toks = split_ws(stripped);
        if (toks.empty()) {
            if (line.find_first_not_of(" \t") != std::string::npos && line[0] != '#' && open_room == nullptr &&
                is_grid_row(line))
                throw ConfigError("grid row outside a room block at line " + std::to_string(lineno));
            continue;
        }
        open_room = nullptr;
        const std::string& key = toks[0];
        auto need = [&](size_t n) {
            if (toks.size() < n + 1)
                throw ConfigError("directive '" + key + "' needs " + std::to_string(n) +
                                  " arguments (line " + std::to_string(lineno) + ")");
        };
        if (key == "name") {
            need(1);
            cfg.name = toks[1];
        } else if (key == "cell_size") {
            need(1);
            cfg.cell_size = to_int(toks[1], "cell_size");
        } else if (key == "actions") {
            cfg.action_set.assign(toks.begin() + 1, toks.end());
        } else if (key == "episode_timeout") {
            need(1);
            cfg.episode_timeout = to_int(toks[1], "episode_timeout");
        } else if (key == "action_slip") {
            need(1);
            cfg.action_slip = to_double(toks[1], "action_slip");
        } else if (key == "frame_stack") {
            need(1);
            cfg.frame_stack = to_int(toks[1], "frame_stack");
        } else if (key == "moving") {
            need(2);
            cfg.moving.push_back({toks[1], to_int(toks[2], "moving max count")});
        } else if (key == "room") {
            need(1);
            cfg.rooms.push_back(RoomGrid{to_int(toks[1], "room index"), {}});
            open_room = &cfg.rooms.back();
        } else if (key == "spawn") {
            need(3);
            cfg.spawn_room = to_int(toks[1], "spawn room");
            cfg.spawn_cx = to_int(toks[2], "spawn x");
            cfg.spawn_cy = to_int(toks[3], "spawn y");
        } else if (key == "object") {
            need(4);
            StaticObjectDef o;
            o.type = toks[1];
            o.room = to_int(toks[2], "object room");
            o.cx = to_int(toks[3], "object x");
            o.cy = to_int(toks[4], "object y");
            if (toks.size() > 5) o.cw = to_int(toks[5], "object w");
            if (toks.size() > 6) o.ch = to_int(toks[6], "object h");
            cfg.objects.push_back(o);
        } else if (key == "enemy") {
            need(6);
            EnemyDef e;
            e.room = to_int(toks[1], "enemy room");
            e.cx = to_int(toks[2], "enemy x");
            e.cy = to_int(toks[3], "enemy y");
            e.axis = toks[4].empty() ? 'h' : toks[4][0];
            e.lo = to_int(toks[5], "enemy lo");
            e.hi = to_int(toks[6], "enemy hi");
            cfg.enemies.push_back(e);
        } else if (key == "goal") {
            need(3);
            GoalDef g;
            g.name = toks[1];
            g.target_type = toks[2];
            g.room = to_int(toks[3], "goal room");
            if (toks.size() > 5)
                g.anchor = {{to_int(toks[4], "goal anchor x"), to_int(toks[5], "goal anchor y")}};
            cfg.goals.push_back(g);
        } else {
            throw ConfigError("unknown directive '" + key + "' at line " + std::to_string(lineno));
        }
    }
    cfg.validate();
    return cfg;
}

EnvConfig load_env_config(const std::string& path_or_name) {
    const auto& builtins = builtin_configs();
    auto it = builtins.find(path_or_name);
    if (it != builtins.end()) return parse_env_config(it->second);
    std::ifstream f(path_or_name);
    if (!f) throw ConfigError("cannot open env config '" + path_or_name + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_env_config(ss.str());
}

}  // namespace owl
