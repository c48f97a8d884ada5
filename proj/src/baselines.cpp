#include "owl/baselines.hpp"

#include <algorithm>
#include <cmath>

namespace owl {

namespace {

// Trainable per-goal embedding table for the goal-conditioned baseline.
struct GoalEmbedding {
    int dim;
    std::vector<float> params, grads;
    nn::Adam<float> opt;

    GoalEmbedding(int goals, int dim_, uint64_t seed)
        : dim(dim_), params(static_cast<size_t>(goals) * dim_),
          grads(static_cast<size_t>(goals) * dim_, 0.0f), opt(params.size()) {
        std::mt19937_64 gen(seed);
        std::uniform_real_distribution<double> u(-0.1, 0.1);
        for (auto& p : params) p = static_cast<float>(u(gen));
    }
    const float* of(int goal) const { return params.data() + static_cast<size_t>(goal) * dim; }
};

// TD update for the goal-conditioned network: inputs are observation plus
// the entry's goal embedding, and the input gradient trains the embedding.
void gc_update(nn::DuelingQNet<float>& net, nn::DuelingQNet<float>& target,
               nn::Adam<float>& opt, GoalEmbedding& emb, ReplayBuffer& buf,
               const TrainConfig& tc, int n_steps, long& grad_steps, Rng& rng) {
    if (buf.size() == 0) return;
    const int B = tc.batch, A = net.actions(), D = net.input_dim(), O = D - emb.dim;
    nn::DuelingQNet<float>::Workspace ws, ws_t;
    std::vector<float> X(static_cast<size_t>(B) * D), Xn(static_cast<size_t>(B) * D);
    std::vector<float> Q(static_cast<size_t>(B) * A), Qn(static_cast<size_t>(B) * A);
    std::vector<float> dQ(static_cast<size_t>(B) * A), dX(static_cast<size_t>(B) * D);
    for (int step = 0; step < n_steps; ++step) {
        auto idx = buf.sample(B, rng);
        for (int i = 0; i < B; ++i) {
            const ReplayEntry& e = buf.entry(idx[i]);
            std::copy(e.s.begin(), e.s.end(), X.begin() + static_cast<size_t>(i) * D);
            std::copy(emb.of(e.goal_id), emb.of(e.goal_id) + emb.dim,
                      X.begin() + static_cast<size_t>(i) * D + O);
            std::copy(e.sn.begin(), e.sn.end(), Xn.begin() + static_cast<size_t>(i) * D);
            std::copy(emb.of(e.goal_id), emb.of(e.goal_id) + emb.dim,
                      Xn.begin() + static_cast<size_t>(i) * D + O);
        }
        target.forward(Xn.data(), B, ws_t, Qn.data());
        net.forward(X.data(), B, ws, Q.data());
        std::fill(dQ.begin(), dQ.end(), 0.0f);
        double loss = 0.0;
        for (int i = 0; i < B; ++i) {
            const ReplayEntry& e = buf.entry(idx[i]);
            float boot = 0.0f;
            if (!e.done) {
                const float* qn = Qn.data() + static_cast<size_t>(i) * A;
                float best = qn[0];
                for (int a = 1; a < A; ++a) best = std::max(best, qn[a]);
                boot = e.gamma_n * (best + e.h_sn);
            }
            float y = e.reward_n + boot;
            float q = Q[static_cast<size_t>(i) * A + e.action] + e.h_s;
            float d = q - y;
            loss += std::fabs(d) <= 1.0f ? 0.5 * d * d : std::fabs(d) - 0.5;
            dQ[static_cast<size_t>(i) * A + e.action] = std::clamp(d, -1.0f, 1.0f) / B;
            buf.update_priority(idx[i], std::fabs(d));
        }
        if (!std::isfinite(loss)) continue;
        net.zero_grads();
        std::fill(emb.grads.begin(), emb.grads.end(), 0.0f);
        net.backward(X.data(), B, ws, dQ.data(), dX.data());
        for (int i = 0; i < B; ++i) {
            const ReplayEntry& e = buf.entry(idx[i]);
            float* eg = emb.grads.data() + static_cast<size_t>(e.goal_id) * emb.dim;
            const float* dx = dX.data() + static_cast<size_t>(i) * D + O;
            for (int k = 0; k < emb.dim; ++k) eg[k] += dx[k];
        }
        nn::clip_grad_norm(net.grads, tc.grad_norm_max);
        nn::clip_grad_norm(emb.grads, tc.grad_norm_max);
        opt.step(net.params, net.grads, tc.lr);
        emb.opt.step(emb.params, emb.grads, tc.lr);
        ++grad_steps;
        if (grad_steps % tc.target_update == 0) target.params = net.params;
    }
}

std::vector<float> with_embedding(const std::vector<float>& obs, const GoalEmbedding& emb,
                                  int goal) {
    std::vector<float> x = obs;
    x.insert(x.end(), emb.of(goal), emb.of(goal) + emb.dim);
    return x;
}

}  // namespace

FlatResult run_flat_agent(const EnvConfig& env_cfg, const FlatOptions& opts,
                          int64_t max_env_steps, const MetricsSink& metrics) {
    GoalSeq goals = goals_from_config(env_cfg);
    ObservationEncoder enc(env_cfg, goals);
    FlatResult result;
    Rng rng(split_seed(opts.seed, 21));

    const int obs_dim = enc.dim();
    const int gc_dim = obs_dim + opts.embedding_dim;
    const int actions = static_cast<int>(env_cfg.action_set.size());

    // goal-conditioned baseline: one shared learner and replay
    std::unique_ptr<nn::DuelingQNet<float>> gc_net, gc_target;
    std::unique_ptr<nn::Adam<float>> gc_opt;
    std::unique_ptr<GoalEmbedding> gc_emb;
    std::unique_ptr<ReplayBuffer> gc_buf;
    long gc_grad_steps = 0;
    if (opts.goal_conditioned) {
        gc_net = std::make_unique<nn::DuelingQNet<float>>(gc_dim, opts.train.hidden_real, actions,
                                                          split_seed(opts.seed, 31));
        gc_target = std::make_unique<nn::DuelingQNet<float>>(*gc_net);
        gc_opt = std::make_unique<nn::Adam<float>>(gc_net->param_count());
        gc_emb = std::make_unique<GoalEmbedding>(static_cast<int>(goals.size()),
                                                 opts.embedding_dim, split_seed(opts.seed, 32));
        gc_buf = std::make_unique<ReplayBuffer>(opts.train.buffer_capacity,
                                                opts.train.priority_temp);
    }

    int64_t steps = 0;
    int mastered = 0;
    for (size_t gi = 0; gi < goals.size() && steps < max_env_steps; ++gi) {
        const GoalSpec& goal = goals[gi];
        std::unique_ptr<QPolicy> policy;
        std::unique_ptr<ReplayBuffer> buf;
        if (!opts.goal_conditioned) {
            policy = std::make_unique<QPolicy>(obs_dim, opts.train.hidden_real, actions,
                                               split_seed(opts.seed, 41 + gi), opts.train);
            buf = std::make_unique<ReplayBuffer>(opts.train.buffer_capacity,
                                                 opts.train.priority_temp);
        }
        ReplayBuffer& rb = opts.goal_conditioned ? *gc_buf : *buf;

        struct W {
            std::unique_ptr<GridEnv> env;
            FrameHistory hist{1};
            SymbolicState cur;
            std::unique_ptr<NStepAssembler> asm_;
        };
        std::vector<W> ws;
        for (int wi = 0; wi < opts.workers; ++wi) {
            W w;
            w.env = std::make_unique<GridEnv>(env_cfg,
                                              split_seed(opts.seed, 600 + 16 * gi + wi));
            w.hist = FrameHistory(env_cfg.frame_stack);
            w.cur = w.env->reset();
            w.hist.reset(w.cur);
            w.asm_ = std::make_unique<NStepAssembler>(rb, opts.train.kappa, opts.train.gamma,
                                                      opts.train.n_step,
                                                      static_cast<int>(gi));
            ws.push_back(std::move(w));
        }
        CompletionWindow window;
        int64_t trained_at = steps;
        bool goal_mastered = false;
        auto greedy_action = [&](const std::vector<float>& obs) {
            if (!opts.goal_conditioned) return policy->greedy(obs);
            auto x = with_embedding(obs, *gc_emb, static_cast<int>(gi));
            nn::DuelingQNet<float>::Workspace wks;
            std::vector<float> q(static_cast<size_t>(actions));
            gc_net->forward(x.data(), 1, wks, q.data());
            int best = 0;
            for (int a = 1; a < actions; ++a)
                if (q[a] > q[best]) best = a;
            return best;
        };

        while (steps < max_env_steps && !goal_mastered) {
            for (int i = 0; i < opts.train.train_frequency && steps < max_env_steps; ++i) {
                W& w = ws[static_cast<size_t>(steps % opts.workers)];
                EncodedObservation obs = enc.encode(w.hist.frames());
                float h = static_cast<float>(heuristic(goal, w.cur));
                int a = greedy_action(obs.v);
                auto res = w.env->step(a);
                w.hist.push(res.state);
                EncodedObservation obs2 = enc.encode(w.hist.frames());
                RawStep step;
                step.enc_s = obs.v;
                step.enc_s2 = obs2.v;
                step.h_s = h;
                step.h_s2 = static_cast<float>(heuristic(goal, res.state));
                step.action = a;
                step.reward_raw = goal_reward(goal, res.state);
                bool success = step.reward_raw > 0.5;
                w.asm_->push(std::move(step));
                if (success || res.timeout) {
                    w.asm_->finish_episode(success);
                    window.record(success);
                    w.cur = w.env->reset();
                    w.hist.reset(w.cur);
                } else {
                    w.cur = res.state;
                }
                ++steps;
            }
            if (steps - trained_at >= opts.train.train_frequency) {
                if (opts.goal_conditioned) {
                    gc_update(*gc_net, *gc_target, *gc_opt, *gc_emb, rb, opts.train,
                              opts.train.grad_steps_per_train, gc_grad_steps, rng);
                } else {
                    policy->dqn_update(rb, opts.train.grad_steps_per_train, rng);
                }
                trained_at = steps;
            }
            if (metrics) {
                MetricsRow row;
                row.env_steps = steps;
                row.options_mastered = mastered;
                row.current_goal = static_cast<int>(gi);
                row.epsilon = 0.0;
                row.options.push_back({static_cast<int>(gi), static_cast<int>(gi), 0,
                                       window.rate(), 0.0});
                metrics(row);
            }
            if (window.mastered()) goal_mastered = true;
        }
        if (goal_mastered) ++mastered;
    }
    result.mastered = mastered;
    result.env_steps = steps;
    return result;
}

}  // namespace owl
