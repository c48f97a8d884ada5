#include "owl/proposer.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <deque>
#include <fstream>
#include <regex>
#include <sstream>

#ifdef OWL_WITH_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include <httplib.h>

namespace owl {

namespace {

const char* kSubgoalTemplate =
    R"(Here is the current observation of the game {game_name}:

{cur_obs}

And here is a list of goals we know how to achieve:

{achieved_goal_names_and_descriptions}

Your task is to list 1 achieved goals that, on its own, can act as a possible stepping stone to achieve the target goal of '{target_goal_name}' -- Description: '{target_goal_description}'.

Required reasoning process:
First, discuss out loud how to achieve the target goal of '{target_goal_name}',
taken into account the current observation.
Then, for each achieved goal, discuss out loud how completing that goal would help us achieve the target goal of '{target_goal_name}', taken into account the current observation.
Make sure to go through all achieved goals. But also do not keep repeating the same achieved goal. The current position of the player is irrelevant.

Final output format:
After you are done reasoning, list the achieved goal in a numbered list with
the following format:
Possible stepping stone 1: <achieved goal>)";

const char* kPrecondTemplateSingle =
    R"(I'll give you an input list of objects.

I want you to list 4 possible features that the input list of objects has that allows us to achieve a certain goal.

Here's an example:

Example input list of objects:
player object with at (x=16, y=104, w=8, h=21),
wall object with at (x=136, y=148, w=7, h=32),
logs object with at (x=125, y=118, w=6, h=14),
stairpit object with at (x=76, y=122, w=8, h=6),
stair object with at (x=78, y=136, w=4, h=42),
platform object with at (x=8, y=179, w=152, h=1),
platform object with at (x=8, y=125, w=152, h=1),
playerscore object with at (x=38, y=9, w=30, h=8),
lifecount object with at (x=23, y=22, w=1, h=8),
lifecount object with at (x=21, y=22, w=1, h=8),
timer object with at (x=31, y=22, w=37, h=8),
portal_0 object with at (x=7, y=85, w=1, h=40),
portal_1 object with at (x=155, y=85, w=1, h=40),
Interaction -- player object with at (x=16, y=104, w=8, h=21) is touching platform object with at (x=8, y=125, w=152, h=1)

Example possible features that allow us to achieve the goal of '{goal}':
1. AnyObjTypeTouching: The player object touches a platform object
2. SpecificObjTouching: The player object touches the platform object located at (x=8, y=125)
3. AnyObjTypeTouching: ...
4. SpecificObjTouching: ...

Now, I want you to list 4 possible features of the input list of objects has that allows us to achieve the goal of '{goal}'.

Input list of objects:
{input}

Please follow these rules for your output:
1. Do not explain -- simply list each feature
2. Make the features diverse
3. Do use interactions (what the player is touching), as they usually make good features
4. Each rule should of type 'AnyObjTypeTouching' or 'SpecificObjTouching')";

const char* kPrecondTemplateMulti =
    R"(I'll give you an input list of objects.

I want you to list 4 possible features that the input list of objects has that allows us to achieve a certain goal.

Here's an example:

Example input list of objects:
player object (x=30, y=150, w=8, h=12),
car object (x=27, y=163, w=20, h=14),
score object (x=75, y=8, w=30, h=8),
clock object (x=67, y=19, w=30, h=8),
roomnumber_+0 object (x=0, y=0, w=0, h=0),
portal_to_prev_room object (x=8, y=27, w=5, h=150),
portal_to_next_room object (x=155, y=27, w=5, h=150),
platform object (x=8, y=177, w=152, h=1),

Example possible features that allow us to achieve the goal of '{goal}':
1. RoomNumberExist: An object with type 'roomnumber_+0' exists
2. ObjTouchingAndRoomNumberExist: The car object touches the platform object and an object with type 'roomnumber_+0' exists

Now, I want you to list 2 possible features of the input list of objects has that allows us to achieve the goal of '{goal}'.

Input list of objects:
{input}

Please follow these rules for your output:
1. Do not explain -- simply list each feature
2. Each rule should of type 'RoomNumberExist' or 'ObjTouchingAndRoomNumberExist'
3. Make sure to mention the roomnumber in the feature, e.g., 'an object with type 'roomnumber_+0' exists')";

std::string replace_all(std::string text, const std::string& key, const std::string& value) {
    size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
    return text;
}

std::string render_object(const GameObject& o, bool with_at) {
    std::ostringstream os;
    std::string type = o.type;
    if (type == "roomnumber") type = "roomnumber_" + std::to_string(o.x);
    os << type << " object " << (with_at ? "with at " : "") << "(x=" << (o.type == "roomnumber" ? 0 : o.x)
       << ", y=" << o.y << ", w=" << o.w << ", h=" << o.h << ")";
    return os.str();
}

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n'\"");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n'\".");
    return s.substr(a, b - a + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

const char* Proposer::subgoal_template() { return kSubgoalTemplate; }
const char* Proposer::precondition_template_single() { return kPrecondTemplateSingle; }
const char* Proposer::precondition_template_multi() { return kPrecondTemplateMulti; }

std::string Proposer::render_state(const SymbolicState& s, bool with_at) {
    std::ostringstream os;
    for (const auto& o : s.objects) os << render_object(o, with_at) << ",\n";
    const GameObject* player = s.find("player");
    if (player) {
        for (const auto& o : s.objects) {
            if (&o == player || o.type == "roomnumber") continue;
            if (boxes_overlap(*player, o))
                os << "Interaction -- " << render_object(*player, with_at) << " is touching "
                   << render_object(o, with_at) << "\n";
        }
    }
    std::string out = os.str();
    while (!out.empty() && out.back() == '\n') out.pop_back();
    return out;
}

std::string Proposer::render_subgoal_prompt(const ProposalRequest& req) const {
    std::ostringstream obs;
    for (size_t i = 0; i < req.sample_states.size(); ++i) {
        if (i) obs << "\n\n";
        obs << render_state(req.sample_states[i], true);
    }
    std::ostringstream achieved;
    for (size_t i = 0; i < req.achieved.size(); ++i) {
        if (i) achieved << "\n";
        achieved << "- " << req.achieved[i].name << ": " << req.achieved_descriptions[i];
    }
    std::string text = kSubgoalTemplate;
    text = replace_all(text, "{game_name}", req.game_name);
    text = replace_all(text, "{cur_obs}", obs.str());
    text = replace_all(text, "{achieved_goal_names_and_descriptions}", achieved.str());
    text = replace_all(text, "{target_goal_name}", req.target.name);
    text = replace_all(text, "{target_goal_description}", req.target_description);
    return text;
}

std::string Proposer::render_precondition_prompt(const ProposalRequest& req) const {
    std::string text = req.multi_controlled ? kPrecondTemplateMulti : kPrecondTemplateSingle;
    std::string input = req.positive_starts.empty()
                            ? ""
                            : render_state(req.positive_starts.front(), !req.multi_controlled);
    text = replace_all(text, "{goal}", req.target.name);
    text = replace_all(text, "{input}", input);
    return text;
}

std::optional<int> Proposer::parse_subgoal_reply(const std::string& reply,
                                                 const ProposalRequest& req) const {
    std::regex line_re(R"(Possible stepping stone 1:\s*(.+))");
    std::smatch m;
    std::string name;
    auto begin = std::sregex_iterator(reply.begin(), reply.end(), line_re);
    for (auto it = begin; it != std::sregex_iterator(); ++it) name = trim((*it)[1].str());
    if (name.empty()) return std::nullopt;
    for (const auto& g : req.achieved)
        if (g.name == name) return g.id;
    std::string lname = lower(name);
    for (const auto& g : req.achieved)
        if (lower(g.name) == lname) return g.id;
    return std::nullopt;
}

std::vector<Precondition> Proposer::parse_precondition_reply(const std::string& reply) const {
    std::vector<Precondition> out;
    std::istringstream is(reply);
    std::string line;
    std::regex item_re(
        R"(^\s*\d+\.\s*(AnyObjTypeTouching|SpecificObjTouching|RoomNumberExist|ObjTouchingAndRoomNumberExist)\s*:\s*(.*)$)");
    std::regex any_re(R"(The (\w+) object touches (?:a|an|the) (\w+) object)");
    std::regex spec_re(R"(touches the (\w+) object located at \(x=(-?\d+),\s*y=(-?\d+)\))");
    std::regex room_re(R"(roomnumber_\+?(-?\d+))");
    while (std::getline(is, line)) {
        std::smatch m;
        if (!std::regex_match(line, m, item_re)) continue;
        std::string kind = m[1].str(), desc = m[2].str();
        std::smatch d;
        if (kind == "AnyObjTypeTouching") {
            if (std::regex_search(desc, d, any_re))
                out.push_back(Precondition::any_touching(d[1].str(), d[2].str()));
        } else if (kind == "SpecificObjTouching") {
            if (std::regex_search(desc, d, spec_re))
                out.push_back(Precondition::specific_touching(d[1].str(), std::stoi(d[2].str()),
                                                              std::stoi(d[3].str())));
        } else if (kind == "RoomNumberExist") {
            if (std::regex_search(desc, d, room_re))
                out.push_back(Precondition::room_exist(std::stoi(d[1].str())));
        } else if (kind == "ObjTouchingAndRoomNumberExist") {
            std::smatch r;
            if (std::regex_search(desc, d, any_re) && std::regex_search(desc, r, room_re))
                out.push_back(Precondition::touching_and_room(d[1].str(), d[2].str(),
                                                              std::stoi(r[1].str())));
        }
    }
    return out;
}

int Proposer::room_graph_distance(int from, int to) const {
    if (from == to) return 0;
    int n = static_cast<int>(env_->rooms.size());
    std::vector<int> dist(static_cast<size_t>(n), -1);
    std::deque<int> q;
    dist[static_cast<size_t>(from)] = 0;
    q.push_back(from);
    auto has = [&](int room, char mark) {
        const RoomGrid& g = env_->room(room);
        int col = (mark == '<') ? 0 : g.width() - 1;
        for (int r = 0; r < g.height(); ++r)
            if (g.at(col, r) == mark) return true;
        return false;
    };
    while (!q.empty()) {
        int r = q.front();
        q.pop_front();
        if (r == to) return dist[static_cast<size_t>(r)];
        if (r > 0 && has(r, '<') && dist[static_cast<size_t>(r - 1)] < 0) {
            dist[static_cast<size_t>(r - 1)] = dist[static_cast<size_t>(r)] + 1;
            q.push_back(r - 1);
        }
        if (r + 1 < n && has(r, '>') && dist[static_cast<size_t>(r + 1)] < 0) {
            dist[static_cast<size_t>(r + 1)] = dist[static_cast<size_t>(r)] + 1;
            q.push_back(r + 1);
        }
    }
    return 1 << 20;  // unreachable
}

namespace {

std::pair<int, int> goal_object_anchor(const EnvConfig& env, const GoalSpec& g) {
    if (g.anchor) return *g.anchor;
    for (const auto& o : env.objects)
        if (o.type == g.target_type && o.room == g.room)
            return {o.cx * env.cell_size, o.cy * env.cell_size};
    return {0, 0};
}

}  // namespace

int Proposer::stub_subgoal(const ProposalRequest& req) const {
    if (req.achieved.empty()) throw ConfigError("subgoal proposal with no achieved goals");
    auto [tx, ty] = goal_object_anchor(*env_, req.target);
    int best = -1;
    long best_room = 0, best_manh = 0;
    for (const auto& g : req.achieved) {
        long droom = room_graph_distance(g.room, req.target.room);
        auto [gx, gy] = goal_object_anchor(*env_, g);
        long dm = std::labs(gx - tx) + std::labs(gy - ty);
        if (best < 0 || droom < best_room || (droom == best_room && dm < best_manh)) {
            best = g.id;
            best_room = droom;
            best_manh = dm;
        }
    }
    return best;
}

std::vector<Precondition> Proposer::stub_preconditions(const ProposalRequest& req) const {
    std::vector<Precondition> out;
    size_t cap = req.multi_controlled ? 2 : 4;
    auto add = [&](Precondition p) {
        if (out.size() >= cap) return;
        for (const auto& q : out)
            if (q == p) return;
        out.push_back(std::move(p));
    };
    bool multi_room = env_->rooms.size() > 1;
    for (const auto& s : req.positive_starts) {
        const GameObject* player = s.find("player");
        if (!player) continue;
        for (const auto& o : s.objects) {
            if (&o == player || o.type == "roomnumber") continue;
            if (!boxes_overlap(*player, o)) continue;
            if (req.multi_controlled && multi_room) {
                add(Precondition::touching_and_room("player", o.type, s.room));
            } else {
                add(Precondition::any_touching("player", o.type));
                add(Precondition::specific_touching(o.type, o.x, o.y));
            }
        }
        if (multi_room) add(Precondition::room_exist(s.room));
    }
    return out;
}

std::string Proposer::call_llm(const std::string& prompt) const {
    const char* key = std::getenv(cfg_.api_key_env.c_str());
    nlohmann::json body{{"model", cfg_.model},
                        {"messages", {{{"role", "user"}, {"content", prompt}}}},
                        {"temperature", cfg_.temperature}};
    httplib::Headers headers;
    if (key) headers.emplace("Authorization", std::string("Bearer ") + key);

    std::string endpoint = cfg_.endpoint;
    if (endpoint.empty()) throw ConfigError("llm proposer without an endpoint");
#ifdef OWL_WITH_OPENSSL
    httplib::Client cli(endpoint);
#else
    if (endpoint.rfind("https://", 0) == 0)
        throw ConfigError("https endpoint requires an OpenSSL-enabled build");
    httplib::Client cli(endpoint);
#endif
    cli.set_read_timeout(cfg_.timeout_seconds, 0);
    cli.set_connection_timeout(cfg_.timeout_seconds, 0);
    auto res = cli.Post(cfg_.path, headers, body.dump(), "application/json");
    if (!res || res->status != 200)
        throw ConfigError("llm request failed with status " +
                          std::to_string(res ? res->status : -1));
    auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
}

std::string Proposer::read_replay(const std::string& key) const {
    std::ifstream f(cfg_.replay_dir + "/" + key);
    if (!f) throw ConfigError("missing replay fixture " + key);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

int Proposer::propose_subgoal(const ProposalRequest& req) {
    if (req.achieved.empty()) throw ConfigError("subgoal proposal with no achieved goals");
    if (cfg_.backend == ProposerConfig::Backend::Stub) return stub_subgoal(req);
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        try {
            std::string reply = cfg_.backend == ProposerConfig::Backend::Replay
                                    ? read_replay("subgoal_" + req.target.name + ".txt")
                                    : call_llm(render_subgoal_prompt(req));
            if (auto id = parse_subgoal_reply(reply, req)) return *id;
        } catch (const ConfigError&) {
            if (cfg_.backend == ProposerConfig::Backend::Replay) break;
        }
    }
    return stub_subgoal(req);
}

std::vector<Precondition> Proposer::propose_preconditions(const ProposalRequest& req) {
    if (cfg_.backend == ProposerConfig::Backend::Stub) return stub_preconditions(req);
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        try {
            std::string reply = cfg_.backend == ProposerConfig::Backend::Replay
                                    ? read_replay("precond_" + req.target.name + ".txt")
                                    : call_llm(render_precondition_prompt(req));
            auto parsed = parse_precondition_reply(reply);
            size_t cap = req.multi_controlled ? 2 : 4;
            if (parsed.size() > cap) parsed.resize(cap);
            if (!parsed.empty()) return parsed;
        } catch (const ConfigError&) {
            if (cfg_.backend == ProposerConfig::Backend::Replay) break;
        }
    }
    return stub_preconditions(req);
}

}  // namespace owl
