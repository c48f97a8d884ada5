#include "owl/precondition.hpp"

#include <sstream>

namespace owl {

namespace {

bool objects_touching(const SymbolicState& s, const std::string& ta, const std::string& tb) {
    for (const auto& a : s.objects) {
        if (a.type != ta) continue;
        for (const auto& b : s.objects) {
            if (&a == &b || b.type != tb) continue;
            if (boxes_overlap(a, b)) return true;
        }
    }
    return false;
}

}  // namespace

std::optional<bool> Precondition::eval(const SimState& s) const {
    switch (kind) {
        case Kind::AnyObjTypeTouching:
            if (s.is_partial()) return std::nullopt;
            return objects_touching(*s.full, type_a, type_b);
        case Kind::SpecificObjTouching: {
            if (s.is_partial()) return std::nullopt;
            const GameObject* player = s.full->find("player");
            if (!player) return false;
            for (const auto& o : s.full->objects)
                if (o.type == type_a && o.x == x && o.y == y && boxes_overlap(*player, o))
                    return true;
            return false;
        }
        case Kind::RoomNumberExist:
            if (s.is_partial()) return std::nullopt;
            return s.full->room == room;
        case Kind::ObjTouchingAndRoomNumberExist:
            if (s.is_partial()) return std::nullopt;
            return s.full->room == room && objects_touching(*s.full, type_a, type_b);
        case Kind::SubgoalHolds: {
            if (goal < 0 || goal >= static_cast<int>(s.abs.bits.size())) return false;
            int8_t b = s.abs.bits[goal];
            if (b == kNone) return std::nullopt;
            return b == 1;
        }
    }
    return false;
}

std::string Precondition::to_string() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::AnyObjTypeTouching:
            os << "AnyObjTypeTouching " << type_a << " " << type_b;
            break;
        case Kind::SpecificObjTouching:
            os << "SpecificObjTouching " << type_a << " " << x << " " << y;
            break;
        case Kind::RoomNumberExist:
            os << "RoomNumberExist " << room;
            break;
        case Kind::ObjTouchingAndRoomNumberExist:
            os << "ObjTouchingAndRoomNumberExist " << type_a << " " << type_b << " " << room;
            break;
        case Kind::SubgoalHolds:
            os << "SubgoalHolds " << goal;
            break;
    }
    return os.str();
}

Precondition Precondition::parse(const std::string& text) {
    std::istringstream is(text);
    std::string kind;
    is >> kind;
    Precondition p;
    if (kind == "AnyObjTypeTouching") {
        p.kind = Kind::AnyObjTypeTouching;
        is >> p.type_a >> p.type_b;
    } else if (kind == "SpecificObjTouching") {
        p.kind = Kind::SpecificObjTouching;
        is >> p.type_a >> p.x >> p.y;
    } else if (kind == "RoomNumberExist") {
        p.kind = Kind::RoomNumberExist;
        is >> p.room;
    } else if (kind == "ObjTouchingAndRoomNumberExist") {
        p.kind = Kind::ObjTouchingAndRoomNumberExist;
        is >> p.type_a >> p.type_b >> p.room;
    } else if (kind == "SubgoalHolds") {
        p.kind = Kind::SubgoalHolds;
        is >> p.goal;
    } else {
        throw ConfigError("unknown precondition kind '" + kind + "'");
    }
    if (is.fail()) throw ConfigError("malformed precondition '" + text + "'");
    return p;
}

}  // namespace owl
