#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "owl/types.hpp"

namespace owl {

// Declarative environment description parsed from a text config:
// room grids as ASCII maps plus an object / goal table.
//
//   name chain6
//   cell_size 8
//   actions NOOP UP DOWN LEFT RIGHT
//   episode_timeout 1000
//   action_slip 0.0
//   frame_stack 4
//   moving player 1          # encoder slots, in declaration order
//   moving roomnumber 1
//   moving enemy 1
//   room 0
//   ####################
//   #..................#     # '.' floor, '#' wall, '<' '>' side portals
//   ...
//   spawn 1 2 13              # room, cell x, cell y
//   object pad_a 1 6 10       # type, room, cell x, cell y [, w cells, h cells]
//   enemy 2 5 4 h 3 9         # room, cell x, cell y, axis, min cell, max cell
//   goal pad_a_r1 pad_a 1     # name, object type, room [, anchor x y in px]

struct RoomGrid {
    int index = 0;
    std::vector<std::string> rows;  // equal-width strings
    int width() const { return rows.empty() ? 0 : static_cast<int>(rows[0].size()); }
    int height() const { return static_cast<int>(rows.size()); }
    char at(int cx, int cy) const { return rows[cy][cx]; }
};

struct StaticObjectDef {
    std::string type;
    int room = 0;
    int cx = 0, cy = 0, cw = 1, ch = 1;
};

struct EnemyDef {
    int room = 0;
    int cx = 0, cy = 0;
    char axis = 'h';  // 'h' or 'v'
    int lo = 0, hi = 0;  // patrol bounds, in cells, along the axis
};

struct GoalDef {
    std::string name;
    std::string target_type;
    int room = 0;
    std::optional<std::pair<int, int>> anchor;  // pixel anchor, if ambiguous
};

struct MovingSlotDef {
    std::string type;
    int max_count = 1;
};

struct EnvConfig {
    std::string name;
    std::string source_text;  // raw config text, kept for checkpoints
    int cell_size = 8;
    std::vector<std::string> action_set;
    int episode_timeout = 1000;
    double action_slip = 0.0;
    int frame_stack = 4;
    std::vector<MovingSlotDef> moving;  // encoder slot declarations, ordered
    std::vector<RoomGrid> rooms;        // sorted by index; indices contiguous
    int spawn_room = 0, spawn_cx = 0, spawn_cy = 0;
    std::vector<StaticObjectDef> objects;
    std::vector<EnemyDef> enemies;
    std::vector<GoalDef> goals;

    const RoomGrid& room(int idx) const;
    bool is_moving_type(const std::string& type) const;
    int moving_max(const std::string& type) const;

    void validate() const;  // throws ConfigError
};

EnvConfig parse_env_config(const std::string& text);
EnvConfig load_env_config(const std::string& path_or_name);  // file path or built-in name

// Built-in configs (also shipped under configs/): "chain6", "room1", "patrol".
const std::map<std::string, std::string>& builtin_configs();

}  // namespace owl
