#pragma once

#include <optional>
#include <string>

#include "owl/goals.hpp"
#include "owl/types.hpp"

namespace owl {

// A state as the simulated abstract environment sees it: either a stored
// full state, or a partial state whose primitive features are all unknown
// while the abstract features (possibly with kNone entries) are retained.
struct SimState {
    std::optional<SymbolicState> full;
    AbstractState abs;

    bool is_partial() const { return !full.has_value(); }
};

// Closed family of precondition programs usable as expert gates.
// Evaluation returns nullopt when it would have to read an unknown field;
// the simulated environment converts that signal into episode termination.
struct Precondition {
    enum class Kind {
        AnyObjTypeTouching,            // some type_a object touches some type_b object
        SpecificObjTouching,           // the player touches the type_a object at (x, y)
        RoomNumberExist,               // the state's room number is `room`
        ObjTouchingAndRoomNumberExist, // AnyObjTypeTouching(type_a, type_b) && room check
        SubgoalHolds,                  // abstract feature `goal` is 1
    };

    Kind kind = Kind::SubgoalHolds;
    std::string type_a, type_b;
    int x = 0, y = 0;
    int room = 0;
    int goal = 0;

    std::optional<bool> eval(const SimState& s) const;

    std::string to_string() const;
    static Precondition parse(const std::string& text);  // throws ConfigError

    bool operator==(const Precondition&) const = default;

    static Precondition any_touching(std::string a, std::string b) {
        Precondition p;
        p.kind = Kind::AnyObjTypeTouching;
        p.type_a = std::move(a);
        p.type_b = std::move(b);
        return p;
    }
    static Precondition specific_touching(std::string t, int x, int y) {
        Precondition p;
        p.kind = Kind::SpecificObjTouching;
        p.type_a = std::move(t);
        p.x = x;
        p.y = y;
        return p;
    }
    static Precondition room_exist(int room) {
        Precondition p;
        p.kind = Kind::RoomNumberExist;
        p.room = room;
        return p;
    }
    static Precondition touching_and_room(std::string a, std::string b, int room) {
        Precondition p;
        p.kind = Kind::ObjTouchingAndRoomNumberExist;
        p.type_a = std::move(a);
        p.type_b = std::move(b);
        p.room = room;
        return p;
    }
    static Precondition subgoal_holds(int goal) {
        Precondition p;
        p.kind = Kind::SubgoalHolds;
        p.goal = goal;
        return p;
    }
};

}  // namespace owl
