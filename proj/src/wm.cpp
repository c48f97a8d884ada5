#include "owl/wm.hpp"

#include <sstream>

#include "owl/goals.hpp"
#include "owl/serialize.hpp"

namespace owl {

void WeightingTable::update(const AbstractState& key, const SymbolicState& s) {
    if (key.has_none())
        throw ConfigError("weighting table keys must be full abstract states");
    map_[key.bits] = s;
}

SimState WeightingTable::lookup(const AbstractState& f) const {
    if (!f.has_none()) {
        auto it = map_.find(f.bits);
        if (it != map_.end()) return SimState{it->second, f};
    }
    return SimState{std::nullopt, f};
}

namespace {

std::string pred_name(Expert::Pred p) {
    switch (p) {
        case Expert::Pred::SetOne: return "SetOne";
        case Expert::Pred::SetZero: return "SetZero";
        case Expert::Pred::NoChange: return "NoChange";
    }
    return "?";
}

Expert::Pred pred_from(const std::string& s) {
    if (s == "SetOne") return Expert::Pred::SetOne;
    if (s == "SetZero") return Expert::Pred::SetZero;
    if (s == "NoChange") return Expert::Pred::NoChange;
    throw ConfigError("unknown expert predictor '" + s + "'");
}

void write_expert(std::ostringstream& os, const Expert& e) {
    os << "expert " << e.target << " " << pred_name(e.pred) << " " << hex_double(e.theta) << " "
       << hex_double(e.mu) << " " << hex_double(e.sigma);
    if (e.condition) os << " " << e.condition->to_string();
    os << "\n";
}

Expert read_expert(const std::string& line) {
    std::istringstream is(line);
    std::string tag, pred, theta, mu, sigma;
    Expert e;
    is >> tag >> e.target >> pred >> theta >> mu >> sigma;
    if (is.fail() || tag != "expert") throw ConfigError("bad expert line: " + line);
    e.pred = pred_from(pred);
    e.theta = parse_hex_double(theta);
    e.mu = parse_hex_double(mu);
    e.sigma = parse_hex_double(sigma);
    std::string rest;
    std::getline(is, rest);
    if (!rest.empty() && rest[0] == ' ') rest = rest.substr(1);
    if (!rest.empty()) e.condition = Precondition::parse(rest);
    return e;
}

std::string key_to_string(const std::vector<int8_t>& bits) {
    std::string s;
    for (int8_t b : bits) s += (b == kNone) ? 'N' : static_cast<char>('0' + b);
    return s;
}

std::vector<int8_t> key_from_string(const std::string& s) {
    std::vector<int8_t> bits;
    for (char c : s) bits.push_back(c == 'N' ? kNone : static_cast<int8_t>(c - '0'));
    return bits;
}

}  // namespace

std::string AbstractWorldModel::serialize() const {
    std::ostringstream os;
    os << "owlwm 1\n";
    os << "eta " << hex_double(poe.eta) << "\n";
    os << "appendix_priors " << (poe.appendix_change_priors ? 1 : 0) << "\n";
    os << "options " << models.size() << "\n";
    for (const auto& [id, m] : models) {
        os << "option " << id << " " << m.target_feature << " " << m.feature_count << " "
           << m.success.size() << " " << m.conditional.size() << "\n";
        for (const auto& e : m.success) write_expert(os, e);
        for (const auto& e : m.conditional) write_expert(os, e);
    }
    os << "table " << table.size() << "\n";
    for (const auto& [key, state] : table.entries())
        os << "row " << key_to_string(key) << " " << state_to_json(state) << "\n";
    return os.str();
}

AbstractWorldModel AbstractWorldModel::deserialize(const std::string& text) {
    AbstractWorldModel wm;
    std::istringstream is(text);
    std::string line;
    auto next_line = [&]() {
        if (!std::getline(is, line)) throw ConfigError("truncated world model checkpoint");
        return line;
    };
    {
        std::istringstream h(next_line());
        std::string magic;
        int version = 0;
        h >> magic >> version;
        if (magic != "owlwm" || version != 1) throw ConfigError("bad world model header");
    }
    {
        std::istringstream h(next_line());
        std::string tag, v;
        h >> tag >> v;
        if (tag != "eta") throw ConfigError("expected eta line");
        wm.poe.eta = parse_hex_double(v);
    }
    {
        std::istringstream h(next_line());
        std::string tag;
        int v = 0;
        h >> tag >> v;
        if (tag != "appendix_priors") throw ConfigError("expected appendix_priors line");
        wm.poe.appendix_change_priors = v != 0;
    }
    size_t option_count = 0;
    {
        std::istringstream h(next_line());
        std::string tag;
        h >> tag >> option_count;
        if (tag != "options") throw ConfigError("expected options line");
    }
    for (size_t i = 0; i < option_count; ++i) {
        std::istringstream h(next_line());
        std::string tag;
        OptionModel m;
        size_t n_succ = 0, n_cond = 0;
        h >> tag >> m.option_id >> m.target_feature >> m.feature_count >> n_succ >> n_cond;
        if (h.fail() || tag != "option") throw ConfigError("bad option line");
        for (size_t k = 0; k < n_succ; ++k) m.success.push_back(read_expert(next_line()));
        for (size_t k = 0; k < n_cond; ++k) m.conditional.push_back(read_expert(next_line()));
        wm.models.emplace(m.option_id, std::move(m));
    }
    size_t rows = 0;
    {
        std::istringstream h(next_line());
        std::string tag;
        h >> tag >> rows;
        if (tag != "table") throw ConfigError("expected table line");
    }
    for (size_t i = 0; i < rows; ++i) {
        std::string l = next_line();
        if (l.rfind("row ", 0) != 0) throw ConfigError("bad table row");
        auto sp = l.find(' ', 4);
        if (sp == std::string::npos) throw ConfigError("bad table row");
        AbstractState key;
        key.bits = key_from_string(l.substr(4, sp - 4));
        wm.table.update(key, state_from_json(l.substr(sp + 1)));
    }
    return wm;
}

SimEnv::SimEnv(const AbstractWorldModel& wm, const GoalSeq& goals, int target_goal,
               std::vector<int> option_ids, uint64_t seed)
    : wm_(wm), goals_(goals), target_goal_(target_goal), option_ids_(std::move(option_ids)),
      rng_(seed) {
    for (const auto& [key, state] : wm_.table.entries()) {
        AbstractState abs;
        abs.bits = key;
        pool_.push_back(SimState{state, abs});
    }
    cur_ = SimState{std::nullopt, AbstractState{}};
}

void SimEnv::add_reset_state(const SymbolicState& s) {
    pool_.push_back(SimState{s, abstract_state(s, goals_)});
}

SimState SimEnv::reset() {
    t_ = 0;
    if (pool_.empty()) {
        AbstractState abs;
        abs.bits.assign(goals_.size(), kNone);
        cur_ = SimState{std::nullopt, abs};
    } else {
        cur_ = pool_[static_cast<size_t>(rng_.uniform_int(static_cast<int>(pool_.size())))];
    }
    return cur_;
}

SimEnv::StepOut SimEnv::step(int action_index) {
    StepOut out;
    if (action_index < 0 || action_index >= action_count())
        throw ConfigError("sim action index out of range");
    int option_id = option_ids_[static_cast<size_t>(action_index)];
    const OptionModel* m = wm_.model(option_id);
    if (!m) throw ConfigError("no model for option " + std::to_string(option_id));
    ++t_;
    auto outcome = sample_outcome(*m, cur_, wm_.poe.eta, rng_);
    if (!outcome) {
        out.access_violation = true;
        out.done = true;
        out.reward_raw = 0.0;
        out.next = cur_;
        return out;
    }
    out.next = wm_.table.lookup(*outcome);
    int8_t bit = outcome->bits[static_cast<size_t>(target_goal_)];
    out.reward_raw = (bit == 1) ? 1.0 : 0.0;
    out.goal_reached = bit == 1;
    out.done = out.goal_reached || t_ >= kHorizon;
    cur_ = out.next;
    return out;
}

}  // namespace owl
