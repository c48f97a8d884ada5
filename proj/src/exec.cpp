#include "owl/exec.hpp"

namespace owl {

int MixedPolicy::select(const ActionContext& ctx) {
    if (ctx.rng.bernoulli(opt_.epsilon)) {
        if (opt_.pi_wm) {
            int oid = opt_.pi_wm->explore_option(ctx.obs, ctx.rng);
            if (auto idx = opt_.action_index_of(oid)) return *idx;
        }
        return ctx.rng.uniform_int(ctx.action_count);
    }
    return opt_.pi_real->greedy(ctx.obs);
}

ExecState& ExecTree::state_of(int option_id) {
    auto it = pool_.find(option_id);
    if (it == pool_.end()) {
        OptionDef* def = ctx_->lookup(option_id);
        if (!def) throw ConfigError("sampled sub-option " + std::to_string(option_id) +
                                    " is not in the option set");
        it = pool_.emplace(option_id, ExecState{}).first;
        it->second.opt = def;
    }
    return it->second;
}

int ExecTree::execute(const SymbolicState& s, const EncodedObservation& enc_s) {
    ExecState* w = &root_;
    size_t guard = 0;
    while (true) {
        while (w->child) {
            w = w->child;
            if (++guard > pool_.size() + 2) throw std::logic_error("cyclic option hierarchy");
        }
        OptionDef& opt = *w->opt;
        if (!w->episode_start_set) {
            w->episode_start = s;
            w->f_episode_start = abstract_state(s, *ctx_->goals);
            w->episode_start_set = true;
        }
        float h = static_cast<float>(heuristic(goal_of(opt), s));
        ActionContext actx{enc_s.v, s, h, opt.action_count(), *ctx_->rng, w->t};
        int a = opt.policy->select(actx);
        if (a < 0 || a >= opt.action_count())
            throw ConfigError("policy for option " + std::to_string(opt.id) +
                              " returned invalid action " + std::to_string(a));
        w->u = s;
        w->enc_u = enc_s.v;
        w->h_u = h;
        w->f_u = abstract_state(s, *ctx_->goals);
        w->t += 1;
        w->pending_action = a;
        if (!opt.is_sub_option_action(a)) return a;
        ExecState& child = state_of(opt.sub_option_at(a));
        w->child = &child;
        w = &child;
        if (++guard > pool_.size() + 2) throw std::logic_error("cyclic option hierarchy");
    }
}

bool ExecTree::receive(const SymbolicState& s2, const EncodedObservation& enc_s2) {
    return receive_rec(root_, s2, enc_s2, false, 0);
}

void ExecTree::force_finish(const SymbolicState& s2, const EncodedObservation& enc_s2) {
    if (root_.active()) receive_rec(root_, s2, enc_s2, true, 0);
    for (auto& [id, st] : pool_)
        if (st.active()) receive_rec(st, s2, enc_s2, true, 0);
}

bool ExecTree::receive_rec(ExecState& w, const SymbolicState& s2,
                           const EncodedObservation& enc_s2, bool force, int depth) {
    bool child_done = true;
    if (w.child) child_done = receive_rec(*w.child, s2, enc_s2, force, depth + 1);

    const GoalSpec& goal = goal_of(*w.opt);
    if (child_done) {
        if (w.pending_action >= 0) {
            StepRecord rec;
            rec.enc_s = w.enc_u;
            rec.enc_s2 = enc_s2.v;
            rec.h_s = w.h_u;
            rec.h_s2 = static_cast<float>(heuristic(goal, s2));
            rec.raw_s = w.u;
            rec.f_s = w.f_u;
            rec.f_s2 = abstract_state(s2, *ctx_->goals);
            rec.action = w.pending_action;
            rec.reward_raw = goal_reward(goal, s2);
            rec.sub_option = w.opt->is_sub_option_action(w.pending_action);
            rec.sub_option_id = rec.sub_option ? w.opt->sub_option_at(w.pending_action) : -1;
            if (ctx_->trace)
                ctx_->trace({ctx_->env_step, depth, w.opt->id, rec.action, rec.reward_raw, false,
                             false});
            if (ctx_->learning) w.D.push_back(std::move(rec));
            w.pending_action = -1;
        }
        w.child = nullptr;
    }

    bool success = eval_goal(goal, s2) == 1;
    bool cur_done = force || success || w.t > ctx_->max_t;
    if (cur_done) {
        bool flushed = false;
        if (ctx_->learning && !w.D.empty()) {
            bool only_stable = true;
            for (const auto& rec : w.D) {
                if (!rec.sub_option) continue;
                OptionDef* a = ctx_->lookup(rec.sub_option_id);
                if (a && a->n_samples < ctx_->n_threshold && a->window.rate() < ctx_->delta_threshold)
                    only_stable = false;
            }
            if (only_stable) {
                flush(w, success, s2);
                flushed = true;
            }
        }
        if (ctx_->learning) w.opt->record_completion(success);
        if (ctx_->trace)
            ctx_->trace({ctx_->env_step, depth, w.opt->id, -1, success ? 1.0 : 0.0, true, flushed});
        w.child = nullptr;
        w.D.clear();
        w.t = 0;
        w.pending_action = -1;
        w.episode_start_set = false;
    }
    return cur_done;
}

void ExecTree::flush(ExecState& w, bool success_at_end, const SymbolicState& s2) {
    OptionDef& opt = *w.opt;
    std::vector<RawStep> raws;
    raws.reserve(w.D.size());
    for (const auto& rec : w.D) {
        RawStep r;
        r.enc_s = rec.enc_s;
        r.enc_s2 = rec.enc_s2;
        r.h_s = rec.h_s;
        r.h_s2 = rec.h_s2;
        r.action = rec.action;
        r.reward_raw = rec.reward_raw;
        raws.push_back(std::move(r));
    }
    push_episode(opt.replay, raws, success_at_end, ctx_->train.kappa, ctx_->train.gamma,
                 ctx_->train.n_step);
    if (ctx_->capture_model_data) {
        for (const auto& rec : w.D) {
            if (!rec.sub_option) continue;
            OptionDef* sub = ctx_->lookup(rec.sub_option_id);
            if (!sub) continue;
            sub->model_data.push_back({rec.raw_s, rec.f_s, rec.f_s2});
            if (rec.f_s2.bits[static_cast<size_t>(sub->goal_id)] == 1) ++sub->model_positives;
        }
        if (&w == &root_ && w.episode_start_set) {
            AbstractState f2 = abstract_state(s2, *ctx_->goals);
            opt.model_data.push_back({w.episode_start, w.f_episode_start, f2});
            if (f2.bits[static_cast<size_t>(opt.goal_id)] == 1) ++opt.model_positives;
        }
    }
    int64_t n = static_cast<int64_t>(w.D.size());
    opt.ct += n;
    opt.anneal(n);
}

}  // namespace owl
