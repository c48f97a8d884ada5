#include "owl/agent.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "owl/serialize.hpp"

namespace owl {

StabilitySets stability_sets(const std::vector<std::unique_ptr<OptionDef>>& options, int goal,
                             double n_threshold, double delta_threshold) {
    StabilitySets out;
    for (const auto& o : options) {
        if (o->goal_id != goal) continue;
        out.members.push_back(o->id);
        double delta = o->window.rate();
        if (static_cast<double>(o->n_samples) > n_threshold || delta > delta_threshold)
            out.stable.push_back(o->id);
        if (delta > delta_threshold) out.good.push_back(o->id);
    }
    return out;
}

Agent::Agent(EnvConfig env_cfg, OwlOptions opts, Proposer* proposer)
    : env_cfg_(std::move(env_cfg)),
      opts_(std::move(opts)),
      proposer_(proposer),
      goals_(goals_from_config(env_cfg_)),
      encoder_(env_cfg_, goals_),
      rng_policy_(split_seed(opts_.seed, 11)),
      rng_train_(split_seed(opts_.seed, 12)) {
    opts_.train.check();
    wm_.poe = opts_.poe;
    GridEnv probe(env_cfg_, split_seed(opts_.seed, 13));
    spawn_state_ = probe.reset();

    exec_ctx_.goals = &goals_;
    exec_ctx_.encoder = &encoder_;
    exec_ctx_.lookup = [this](int id) { return lookup(id); };
    exec_ctx_.n_threshold = opts_.n_threshold;
    exec_ctx_.delta_threshold = opts_.delta_threshold;
    exec_ctx_.max_t = opts_.max_t;
    exec_ctx_.train = opts_.train;
    exec_ctx_.rng = &rng_policy_;
    exec_ctx_.capture_model_data = true;
}

OptionDef* Agent::lookup(int id) {
    for (auto& o : options_)
        if (o->id == id) return o.get();
    return nullptr;
}

std::string Agent::goal_description(const GoalSpec& g) const {
    if (env_cfg_.rooms.size() > 1)
        return "in room #" + std::to_string(g.room) + ", touch object with id " + g.target_type;
    return "touch object with id " + g.target_type;
}

std::unique_ptr<OptionDef> Agent::make_option(int goal_id, std::optional<int> precondition_goal,
                                              uint64_t seed) {
    std::vector<int> subs;
    for (const auto& o : options_) subs.push_back(o->id);
    auto opt = std::make_unique<OptionDef>(next_option_id_++, goal_id,
                                           static_cast<int>(env_cfg_.action_set.size()),
                                           std::move(subs), opts_.train);
    opt->precondition_goal = precondition_goal;
    opt->anneal_samples = opts_.anneal_samples;
    opt->epsilon = opts_.epsilon_enabled ? 1.0 : 0.0;
    opt->pi_real = std::make_unique<QPolicy>(encoder_.dim(), opts_.train.hidden_real,
                                             opt->action_count(), seed, opts_.train);
    opt->policy = std::make_unique<MixedPolicy>(*opt);
    return opt;
}

void Agent::adopt_option(std::unique_ptr<OptionDef> opt, std::vector<Precondition> proposals) {
    OptionModel model = build_option_model(opt->id, opt->goal_id,
                                           static_cast<int>(goals_.size()), proposals, opts_.poe);
    if (!opt->model_data.empty()) map_fit(model, opt->model_data, opts_.poe);
    opt->model_fitted_upto = opt->model_data.size();
    wm_.models.emplace(opt->id, std::move(model));
    options_.push_back(std::move(opt));
}

std::vector<SymbolicState> Agent::states_per_room() const {
    std::vector<SymbolicState> out;
    std::set<int> seen;
    for (const auto& [key, state] : wm_.table.entries()) {
        if (seen.insert(state.room).second) out.push_back(state);
    }
    if (out.empty()) out.push_back(spawn_state_);
    return out;
}

void Agent::maybe_hypothesize(int goal_id, OptionDef& target, bool& wm_dirty) {
    if (!opts_.use_proposer || !proposer_) return;
    auto sets = stability_sets(options_, goal_id, opts_.n_threshold, opts_.delta_threshold);
    if (sets.members.size() != sets.stable.size() || !sets.good.empty()) return;
    if (mastered_goals_.empty()) return;

    std::vector<int> tried;
    for (const auto& o : options_)
        if (o->goal_id == goal_id && o->precondition_goal) tried.push_back(*o->precondition_goal);

    ProposalRequest req;
    req.mode = ProposalRequest::Mode::Subgoal;
    req.game_name = env_cfg_.name;
    req.target = goals_[static_cast<size_t>(goal_id)];
    req.target_description = goal_description(req.target);
    for (int g : mastered_goals_) {
        if (std::find(tried.begin(), tried.end(), g) != tried.end()) continue;
        req.achieved.push_back(goals_[static_cast<size_t>(g)]);
        req.achieved_descriptions.push_back(goal_description(goals_[static_cast<size_t>(g)]));
    }
    if (req.achieved.empty()) return;
    req.sample_states = states_per_room();

    int h = proposer_->propose_subgoal(req);
    auto opt = make_option(goal_id, h, split_seed(opts_.seed, 500 + next_option_id_));
    std::vector<Precondition> props = {Precondition::subgoal_holds(h)};
    adopt_option(std::move(opt), props);

    // The option set changed: reinitialize the target policy over the
    // enlarged action space.
    target.sub_option_ids.push_back(options_.back()->id);
    target.pi_real = std::make_unique<QPolicy>(encoder_.dim(), opts_.train.hidden_real,
                                               target.action_count(),
                                               split_seed(opts_.seed, 700 + next_option_id_),
                                               opts_.train);
    wm_dirty = true;
}

bool Agent::refit_world_model() {
    bool new_positive_fits = false;
    for (auto& opt : options_) {
        if (opt->model_data.size() <= opt->model_fitted_upto) continue;
        auto it = wm_.models.find(opt->id);
        if (it == wm_.models.end()) continue;
        OptionModel& model = it->second;
        bool had_positive_before = false;
        for (size_t i = 0; i < opt->model_fitted_upto; ++i)
            if (opt->model_data[i].f_s2.bits[static_cast<size_t>(opt->goal_id)] == 1)
                had_positive_before = true;
        if (!model.has_precondition_success_expert() && opt->model_positives > 0 && proposer_) {
            ProposalRequest req;
            req.mode = ProposalRequest::Mode::Precondition;
            req.game_name = env_cfg_.name;
            req.target = goals_[static_cast<size_t>(opt->goal_id)];
            req.target_description = goal_description(req.target);
            for (const auto& d : opt->model_data) {
                if (d.f_s2.bits[static_cast<size_t>(opt->goal_id)] != 1) continue;
                req.positive_starts.push_back(d.s);
                if (req.positive_starts.size() >= 16) break;
            }
            auto props = proposer_->propose_preconditions(req);
            std::vector<Expert> rebuilt;
            for (const auto& p : props) {
                Expert e;
                e.target = model.target_feature;
                e.pred = Expert::Pred::SetOne;
                e.condition = p;
                e.mu = 0.5;
                e.sigma = 0.1;
                e.theta = e.mu;
                rebuilt.push_back(std::move(e));
            }
            for (auto& e : model.success)
                if (e.condition && e.condition->kind == Precondition::Kind::SubgoalHolds)
                    rebuilt.push_back(e);
            for (auto& e : model.success)
                if (!e.condition) rebuilt.push_back(e);  // blanket
            model.success = std::move(rebuilt);
        }
        map_fit(model, opt->model_data, opts_.poe);
        bool has_positive_now = opt->model_positives > 0;
        if (has_positive_now && !had_positive_before) new_positive_fits = true;
        opt->model_fitted_upto = opt->model_data.size();
    }
    return new_positive_fits;
}

void Agent::retrain_wm_policy(OptionDef& target) {
    if (!opts_.use_world_model || options_.empty()) {
        target.pi_wm = nullptr;
        return;
    }
    std::vector<int> ids;
    for (const auto& o : options_) ids.push_back(o->id);
    SimEnv sim(wm_, goals_, target.goal_id, ids,
               split_seed(opts_.seed, 900 + (wm_retrain_counter_++)));
    sim.add_reset_state(spawn_state_);
    target.pi_wm = train_in_world_model(sim, encoder_, goals_, opts_.wm_train,
                                        split_seed(opts_.seed, 1300 + wm_retrain_counter_));
}

void Agent::rollout_round(std::vector<Worker>& workers, int goal_id, int steps) {
    const GoalSpec& goal = goals_[static_cast<size_t>(goal_id)];
    for (int i = 0; i < steps; ++i) {
        Worker& w = workers[static_cast<size_t>(i % workers.size())];
        exec_ctx_.env_step = env_steps_;
        EncodedObservation enc = encoder_.encode(w.hist.frames());
        int a = w.tree->execute(w.cur, enc);
        auto res = w.env->step(a);
        w.hist.push(res.state);
        EncodedObservation enc2 = encoder_.encode(w.hist.frames());
        if (env_trace_) (*env_trace_) << GridEnv::state_to_json(res.state) << "\n";
        bool root_done = w.tree->receive(res.state, enc2);
        (void)root_done;
        if (opts_.use_world_model)
            wm_.table.update(abstract_state(res.state, goals_), res.state);
        bool env_done = eval_goal(goal, res.state) == 1 || res.timeout;
        if (env_done) {
            w.tree->force_finish(res.state, enc2);
            w.cur = w.env->reset();
            w.hist.reset(w.cur);
            if (opts_.use_world_model)
                wm_.table.update(abstract_state(w.cur, goals_), w.cur);
        } else {
            w.cur = res.state;
        }
        ++env_steps_;
    }
}

void Agent::train_pending_options(OptionDef& target) {
    auto train_one = [&](OptionDef& o) {
        if (o.ct < opts_.train.train_frequency) return;
        int64_t n = o.ct;
        o.pi_real->dqn_update(o.replay, static_cast<int>(opts_.n_steps_per_sample * n),
                              rng_train_);
        o.n_samples += n;
        o.ct = 0;
    };
    for (auto& o : options_) train_one(*o);
    train_one(target);
}

void Agent::emit_metrics(int goal_id, const OptionDef& target) {
    if (!metrics_) return;
    MetricsRow row;
    row.env_steps = env_steps_;
    row.options_mastered = mastered_count();
    row.current_goal = goal_id;
    row.epsilon = target.epsilon;
    for (const auto& o : options_)
        row.options.push_back({o->id, o->goal_id, o->n_samples, o->window.rate(), o->epsilon});
    metrics_(row);
}

bool Agent::learn_option(int goal_id, int64_t max_total_env_steps) {
    auto target = make_option(goal_id, std::nullopt, split_seed(opts_.seed, 40 + goal_id));

    std::vector<Worker> workers;
    for (int wi = 0; wi < opts_.workers; ++wi) {
        Worker w;
        w.env = std::make_unique<GridEnv>(env_cfg_,
                                          split_seed(opts_.seed, 2000 + 16 * goal_id + wi));
        w.hist = FrameHistory(env_cfg_.frame_stack);
        w.cur = w.env->reset();
        w.hist.reset(w.cur);
        w.tree = std::make_unique<ExecTree>(&exec_ctx_, target.get());
        workers.push_back(std::move(w));
    }
    exec_ctx_.trace = trace_;
    exec_ctx_.learning = true;
    if (opts_.use_world_model)
        wm_.table.update(abstract_state(spawn_state_, goals_), spawn_state_);

    bool wm_dirty = true;
    bool mastered = false;
    while (env_steps_ < max_total_env_steps) {
        maybe_hypothesize(goal_id, *target, wm_dirty);
        if (opts_.use_world_model && wm_dirty) {
            retrain_wm_policy(*target);
            wm_dirty = false;
        }
        int round = std::min<int64_t>(opts_.train.train_frequency,
                                      max_total_env_steps - env_steps_);
        rollout_round(workers, goal_id, round);
        train_pending_options(*target);
        if (opts_.use_world_model && refit_world_model()) wm_dirty = true;
        emit_metrics(goal_id, *target);
        if (target->window.mastered()) {
            mastered = true;
            break;
        }
    }

    if (mastered) {
        mastered_goals_.insert(goal_id);
        std::vector<Precondition> props;
        if (proposer_ && target->model_positives > 0) {
            ProposalRequest req;
            req.mode = ProposalRequest::Mode::Precondition;
            req.game_name = env_cfg_.name;
            req.target = goals_[static_cast<size_t>(goal_id)];
            req.target_description = goal_description(req.target);
            for (const auto& d : target->model_data) {
                if (d.f_s2.bits[static_cast<size_t>(goal_id)] != 1) continue;
                req.positive_starts.push_back(d.s);
                if (req.positive_starts.size() >= 16) break;
            }
            props = proposer_->propose_preconditions(req);
        }
        emit_metrics(goal_id, *target);
        adopt_option(std::move(target), props);
    }
    return mastered;
}

double Agent::eval_option_success(int option_id, int episodes) {
    OptionDef* opt = lookup(option_id);
    if (!opt) throw ConfigError("unknown option id");
    std::vector<double> saved;
    for (auto& o : options_) {
        saved.push_back(o->epsilon);
        o->epsilon = 0.0;
    }
    ExecContext ctx = exec_ctx_;
    ctx.learning = false;
    ctx.capture_model_data = false;
    ctx.trace = nullptr;
    Rng eval_rng(split_seed(opts_.seed, 77));
    ctx.rng = &eval_rng;

    GridEnv env(env_cfg_, split_seed(opts_.seed, 78));
    const GoalSpec& goal = goals_[static_cast<size_t>(opt->goal_id)];
    int successes = 0;
    for (int ep = 0; ep < episodes; ++ep) {
        ExecTree tree(&ctx, opt);
        SymbolicState cur = env.reset();
        FrameHistory hist(env_cfg_.frame_stack);
        hist.reset(cur);
        bool success = false;
        while (true) {
            EncodedObservation enc = encoder_.encode(hist.frames());
            int a = tree.execute(cur, enc);
            auto res = env.step(a);
            hist.push(res.state);
            EncodedObservation enc2 = encoder_.encode(hist.frames());
            bool done = tree.receive(res.state, enc2);
            cur = res.state;
            if (eval_goal(goal, res.state) == 1) {
                success = true;
                break;
            }
            if (done || res.timeout) break;
        }
        if (success) ++successes;
    }
    for (size_t i = 0; i < options_.size(); ++i) options_[i]->epsilon = saved[i];
    return static_cast<double>(successes) / episodes;
}

namespace {

// Root decision rule for planned execution: follow the world-model policy's
// greedy option choice.
struct PlannerPolicy : IPolicy {
    WmPolicy* plan;
    OptionDef* root;
    int select(const ActionContext& ctx) override {
        int oid = plan->greedy_option(ctx.obs);
        if (auto idx = root->action_index_of(oid)) return *idx;
        return 0;
    }
};

}  // namespace

double Agent::eval_planned_goal(int goal_id, const std::vector<int>& option_ids, int episodes) {
    if (option_ids.empty()) return 0.0;
    SimEnv sim(wm_, goals_, goal_id, option_ids, split_seed(opts_.seed, 8800 + goal_id));
    sim.add_reset_state(spawn_state_);
    auto plan = train_in_world_model(sim, encoder_, goals_, opts_.wm_train,
                                     split_seed(opts_.seed, 8900 + goal_id));
    if (!plan) return 0.0;

    OptionDef root(-1, goal_id, 0, option_ids, opts_.train);
    auto planner = std::make_unique<PlannerPolicy>();
    planner->plan = plan.get();
    planner->root = &root;
    root.policy = std::move(planner);

    std::vector<double> saved;
    for (auto& o : options_) {
        saved.push_back(o->epsilon);
        o->epsilon = 0.0;
    }
    ExecContext ctx = exec_ctx_;
    ctx.learning = false;
    ctx.capture_model_data = false;
    ctx.trace = nullptr;
    Rng eval_rng(split_seed(opts_.seed, 8700 + goal_id));
    ctx.rng = &eval_rng;

    GridEnv env(env_cfg_, split_seed(opts_.seed, 8600 + goal_id));
    const GoalSpec& goal = goals_[static_cast<size_t>(goal_id)];
    int successes = 0;
    for (int ep = 0; ep < episodes; ++ep) {
        ExecTree tree(&ctx, &root);
        SymbolicState cur = env.reset();
        FrameHistory hist(env_cfg_.frame_stack);
        hist.reset(cur);
        bool success = false;
        while (true) {
            EncodedObservation enc = encoder_.encode(hist.frames());
            int a = tree.execute(cur, enc);
            auto res = env.step(a);
            hist.push(res.state);
            EncodedObservation enc2 = encoder_.encode(hist.frames());
            bool done = tree.receive(res.state, enc2);
            cur = res.state;
            if (eval_goal(goal, res.state) == 1) {
                success = true;
                break;
            }
            if (done || res.timeout) break;
        }
        if (success) ++successes;
    }
    for (size_t i = 0; i < options_.size(); ++i) options_[i]->epsilon = saved[i];
    return static_cast<double>(successes) / episodes;
}

double Agent::eval_random_goal(int goal_id, int episodes) {
    GridEnv env(env_cfg_, split_seed(opts_.seed, 9100 + goal_id));
    Rng rng(split_seed(opts_.seed, 9200 + goal_id));
    const GoalSpec& goal = goals_[static_cast<size_t>(goal_id)];
    int successes = 0;
    for (int ep = 0; ep < episodes; ++ep) {
        env.reset();
        while (true) {
            auto res = env.step(rng.uniform_int(static_cast<int>(env_cfg_.action_set.size())));
            if (eval_goal(goal, res.state) == 1) {
                ++successes;
                break;
            }
            if (res.timeout) break;
        }
    }
    return static_cast<double>(successes) / episodes;
}

void Agent::override_spawn(int room, int cx, int cy) {
    env_cfg_.spawn_room = room;
    env_cfg_.spawn_cx = cx;
    env_cfg_.spawn_cy = cy;
    env_cfg_.validate();
    GridEnv probe(env_cfg_, split_seed(opts_.seed, 13));
    spawn_state_ = probe.reset();
}

void Agent::reinitialize_policies() {
    int k = 0;
    for (auto& o : options_) {
        o->pi_real->reinit(split_seed(opts_.seed, 3000 + (k++)));
        o->pi_wm = nullptr;
        o->epsilon = opts_.epsilon_enabled ? 1.0 : 0.0;
        o->total_flushed = 0;
        o->n_samples = 0;
        o->ct = 0;
        o->window.clear();
        o->good_once = false;
        o->replay.clear();
    }
    mastered_goals_.clear();
}

}  // namespace owl
