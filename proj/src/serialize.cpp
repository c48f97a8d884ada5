#include "owl/serialize.hpp"

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>

namespace owl {

std::string hex_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%a", v);
    return buf;
}

double parse_hex_double(const std::string& s) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str()) throw ConfigError("bad hex float '" + s + "'");
    return v;
}

std::string state_to_json(const SymbolicState& s) {
    nlohmann::json j;
    j["room"] = s.room;
    auto arr = nlohmann::json::array();
    for (const auto& o : s.objects)
        arr.push_back({{"type", o.type},
                       {"x", o.x},
                       {"y", o.y},
                       {"w", o.w},
                       {"h", o.h},
                       {"static", o.is_static}});
    j["objects"] = arr;
    return j.dump();
}

SymbolicState state_from_json(const std::string& line) {
    auto j = nlohmann::json::parse(line);
    SymbolicState s;
    s.room = j.at("room").get<int>();
    for (const auto& jo : j.at("objects")) {
        GameObject o;
        o.type = jo.at("type").get<std::string>();
        o.x = jo.at("x").get<int>();
        o.y = jo.at("y").get<int>();
        o.w = jo.at("w").get<int>();
        o.h = jo.at("h").get<int>();
        o.is_static = jo.at("static").get<bool>();
        s.objects.push_back(std::move(o));
    }
    return s;
}

void write_f32_blob(std::ostream& os, const std::vector<float>& v) {
    static_assert(sizeof(float) == 4);
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(float)));
}

std::vector<float> read_f32_blob(std::istream& is, size_t count) {
    std::vector<float> v(count);
    is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(float)));
    if (!is) throw ConfigError("truncated float blob");
    return v;
}

}  // namespace owl
