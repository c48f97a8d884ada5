#include "owl/wm_policy.hpp"

#include <algorithm>

namespace owl {

std::unique_ptr<WmPolicy> train_in_world_model(SimEnv& env, const ObservationEncoder& enc,
                                               const GoalSeq& goals, const WmTrainConfig& cfg,
                                               uint64_t seed) {
    if (env.action_count() == 0) return nullptr;

    TrainConfig tc = cfg.base;
    tc.n_step = 1;
    auto policy = std::make_unique<WmPolicy>();
    policy->option_ids = env.option_ids();
    policy->final_explore = cfg.explore_end;
    policy->q = std::make_unique<QPolicy>(enc.dim(), tc.hidden_wm, env.action_count(),
                                          split_seed(seed, 1), tc);

    ReplayBuffer buf(tc.buffer_capacity, tc.priority_temp);
    Rng rng(split_seed(seed, 2));
    const GoalSpec& goal = goals[static_cast<size_t>(env.target_goal())];

    auto h_of = [&](const SimState& s) {
        return s.full ? static_cast<float>(heuristic(goal, *s.full)) : 0.0f;
    };

    SimState s = env.reset();
    EncodedObservation obs = enc.encode_sim(s.full ? &*s.full : nullptr, s.abs);
    std::vector<RawStep> episode;
    int trained_at = 0;
    for (int t = 0; t < cfg.total_steps; ++t) {
        double frac = std::min(1.0, static_cast<double>(t) /
                                        std::max(1.0, cfg.explore_fraction * cfg.total_steps));
        double eps = cfg.explore_start + (cfg.explore_end - cfg.explore_start) * frac;
        int a = rng.bernoulli(eps) ? rng.uniform_int(env.action_count())
                                   : policy->q->greedy(obs.v);
        auto out = env.step(a);
        EncodedObservation obs2 = enc.encode_sim(out.next.full ? &*out.next.full : nullptr,
                                                 out.next.abs);
        RawStep step;
        step.enc_s = obs.v;
        step.enc_s2 = obs2.v;
        step.h_s = h_of(s);
        step.h_s2 = h_of(out.next);
        step.action = a;
        step.reward_raw = out.reward_raw;
        episode.push_back(std::move(step));
        if (out.done) {
            push_episode(buf, episode, out.goal_reached, tc.kappa, tc.gamma, 1);
            episode.clear();
            s = env.reset();
            obs = enc.encode_sim(s.full ? &*s.full : nullptr, s.abs);
        } else {
            s = out.next;
            obs = std::move(obs2);
        }
        if (t + 1 - trained_at >= tc.train_frequency) {
            policy->q->dqn_update(buf, tc.grad_steps_per_train, rng);
            trained_at = t + 1;
        }
    }
    if (!episode.empty()) push_episode(buf, episode, false, tc.kappa, tc.gamma, 1);
    return policy;
}

}  // namespace owl
