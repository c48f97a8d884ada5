#include <filesystem>
#include <fstream>
#include <sstream>

#include "owl/agent.hpp"
#include "owl/serialize.hpp"

namespace owl {

namespace {

std::string window_string(const CompletionWindow& w) {
    auto v = w.dump();
    if (v.empty()) return "-";
    std::string s;
    for (auto b : v) s += static_cast<char>('0' + b);
    return s;
}

void load_window(CompletionWindow& w, const std::string& s) {
    w.clear();
    if (s == "-") return;
    std::vector<uint8_t> v;
    for (char c : s) v.push_back(static_cast<uint8_t>(c - '0'));
    w.load(v);
}

}  // namespace

void Agent::save_checkpoint(const std::string& dir) const {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    {
        std::ofstream f(dir + "/envconfig.txt", std::ios::binary);
        f << env_cfg_.source_text;
    }
    {
        std::ofstream f(dir + "/wm.txt", std::ios::binary);
        f << wm_.serialize();
    }
    std::ofstream mf(dir + "/manifest.txt", std::ios::binary);
    std::ofstream pf(dir + "/params.bin", std::ios::binary);
    mf << "owlagent 1\n";
    mf << "steps " << env_steps_ << "\n";
    mf << "next_option_id " << next_option_id_ << "\n";
    mf << "mastered " << mastered_goals_.size();
    for (int g : mastered_goals_) mf << " " << g;
    mf << "\n";
    mf << "options " << options_.size() << "\n";
    for (const auto& o : options_) {
        mf << "option " << o->id << " " << o->goal_id << " "
           << (o->precondition_goal ? *o->precondition_goal : -1) << " "
           << o->sub_option_ids.size();
        for (int s : o->sub_option_ids) mf << " " << s;
        mf << "\n";
        mf << "stats " << o->n_samples << " " << o->total_flushed << " "
           << hex_double(o->epsilon) << " " << (o->good_once ? 1 : 0) << " "
           << window_string(o->window) << " " << o->replay.size() << " "
           << o->model_data.size() << "\n";
        const auto& net = o->pi_real->net();
        mf << "real " << net.input_dim() << " " << net.hidden() << " " << net.actions() << " "
           << net.param_count() << "\n";
        write_f32_blob(pf, net.params);
        write_f32_blob(pf, o->pi_real->target().params);
        if (o->pi_wm) {
            const auto& wnet = o->pi_wm->q->net();
            mf << "wm 1 " << hex_double(o->pi_wm->final_explore) << " " << wnet.input_dim() << " "
               << wnet.hidden() << " " << wnet.actions() << " " << wnet.param_count();
            for (int id : o->pi_wm->option_ids) mf << " " << id;
            mf << "\n";
            write_f32_blob(pf, wnet.params);
            write_f32_blob(pf, o->pi_wm->q->target().params);
        } else {
            mf << "wm 0\n";
        }
    }
}

std::unique_ptr<Agent> Agent::load_checkpoint(const std::string& dir, OwlOptions opts,
                                              Proposer* proposer) {
    auto slurp = [&](const std::string& name) {
        std::ifstream f(dir + "/" + name, std::ios::binary);
        if (!f) throw ConfigError("checkpoint missing " + name);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    };
    EnvConfig cfg = parse_env_config(slurp("envconfig.txt"));
    auto agent = std::make_unique<Agent>(cfg, opts, proposer);
    agent->wm_ = AbstractWorldModel::deserialize(slurp("wm.txt"));

    std::istringstream mf(slurp("manifest.txt"));
    std::ifstream pf(dir + "/params.bin", std::ios::binary);
    std::string line;
    auto next = [&]() {
        if (!std::getline(mf, line)) throw ConfigError("truncated manifest");
        return std::istringstream(line);
    };
    {
        auto is = next();
        std::string magic;
        int ver;
        is >> magic >> ver;
        if (magic != "owlagent" || ver != 1) throw ConfigError("bad agent manifest");
    }
    {
        auto is = next();
        std::string tag;
        is >> tag >> agent->env_steps_;
    }
    {
        auto is = next();
        std::string tag;
        is >> tag >> agent->next_option_id_;
    }
    {
        auto is = next();
        std::string tag;
        size_t n;
        is >> tag >> n;
        for (size_t i = 0; i < n; ++i) {
            int g;
            is >> g;
            agent->mastered_goals_.insert(g);
        }
    }
    size_t option_count = 0;
    {
        auto is = next();
        std::string tag;
        is >> tag >> option_count;
    }
    for (size_t i = 0; i < option_count; ++i) {
        int id, goal_id, precond;
        size_t nsubs;
        {
            auto is = next();
            std::string tag;
            is >> tag >> id >> goal_id >> precond >> nsubs;
            std::vector<int> subs(nsubs);
            for (auto& s : subs) is >> s;
            auto opt = std::make_unique<OptionDef>(id, goal_id,
                                                   static_cast<int>(cfg.action_set.size()),
                                                   std::move(subs), opts.train);
            if (precond >= 0) opt->precondition_goal = precond;
            opt->anneal_samples = opts.anneal_samples;
            agent->options_.push_back(std::move(opt));
        }
        OptionDef& opt = *agent->options_.back();
        {
            auto is = next();
            std::string tag, eps, window;
            int good;
            int64_t replay_size, model_size;
            is >> tag >> opt.n_samples >> opt.total_flushed >> eps >> good >> window >>
                replay_size >> model_size;
            opt.epsilon = parse_hex_double(eps);
            opt.good_once = good != 0;
            load_window(opt.window, window);
        }
        {
            auto is = next();
            std::string tag;
            int in, hid, act;
            size_t pc;
            is >> tag >> in >> hid >> act >> pc;
            opt.pi_real = std::make_unique<QPolicy>(in, hid, act, 0, opts.train);
            opt.pi_real->net().params = read_f32_blob(pf, pc);
            opt.pi_real->target_mutable().params = read_f32_blob(pf, pc);
        }
        {
            auto is = next();
            std::string tag;
            int has;
            is >> tag >> has;
            if (has) {
                std::string fe;
                int in, hid, act;
                size_t pc;
                is >> fe >> in >> hid >> act >> pc;
                auto wp = std::make_unique<WmPolicy>();
                wp->final_explore = parse_hex_double(fe);
                wp->q = std::make_unique<QPolicy>(in, hid, act, 0, opts.train);
                int oid;
                while (is >> oid) wp->option_ids.push_back(oid);
                wp->q->net().params = read_f32_blob(pf, pc);
                wp->q->target_mutable().params = read_f32_blob(pf, pc);
                opt.pi_wm = std::move(wp);
            }
        }
        opt.policy = std::make_unique<MixedPolicy>(opt);
    }
    return agent;
}

}  // namespace owl
