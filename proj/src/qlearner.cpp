#include "owl/qlearner.hpp"

#include <algorithm>
#include <cmath>

namespace owl {

QPolicy::QPolicy(int input_dim, int hidden, int actions, uint64_t seed, TrainConfig cfg)
    : cfg_(cfg),
      net_(input_dim, hidden, actions, seed),
      target_(input_dim, hidden, actions, seed),
      opt_(net_.param_count()) {
    cfg_.check();
    target_.params = net_.params;
}

void QPolicy::reinit(uint64_t seed) {
    net_ = nn::DuelingQNet<float>(net_.input_dim(), net_.hidden(), net_.actions(), seed);
    target_.params = net_.params;
    opt_ = nn::Adam<float>(net_.param_count());
    grad_steps_ = 0;
}

std::vector<float> QPolicy::q_values(std::span<const float> obs, float h) {
    std::vector<float> q(net_.actions());
    net_.forward(obs.data(), 1, ws_, q.data());
    for (float& v : q) v += h;
    return q;
}

int QPolicy::greedy(std::span<const float> obs) {
    std::vector<float> q(net_.actions());
    net_.forward(obs.data(), 1, ws_, q.data());
    int best = 0;
    for (int a = 1; a < net_.actions(); ++a)
        if (q[a] > q[best]) best = a;
    return best;
}

UpdateReport QPolicy::dqn_update(ReplayBuffer& buf, int n_gradient_steps, Rng& rng) {
    UpdateReport rep;
    if (buf.size() == 0) return rep;
    const int B = cfg_.batch;
    const int A = net_.actions();
    const int D = net_.input_dim();
    std::vector<float> X(static_cast<size_t>(B) * D), Xn(static_cast<size_t>(B) * D);
    std::vector<float> Q(static_cast<size_t>(B) * A), Qn(static_cast<size_t>(B) * A);
    std::vector<float> dQ(static_cast<size_t>(B) * A);
    std::vector<float> y(B), td(B);
    double loss_acc = 0.0;
    int loss_count = 0;

    for (int step = 0; step < n_gradient_steps; ++step) {
        auto idx = buf.sample(B, rng);
        for (int i = 0; i < B; ++i) {
            const ReplayEntry& e = buf.entry(idx[i]);
            std::copy(e.s.begin(), e.s.end(), X.begin() + static_cast<size_t>(i) * D);
            std::copy(e.sn.begin(), e.sn.end(), Xn.begin() + static_cast<size_t>(i) * D);
        }
        target_.forward(Xn.data(), B, ws_target_, Qn.data());
        for (int i = 0; i < B; ++i) {
            const ReplayEntry& e = buf.entry(idx[i]);
            float boot = 0.0f;
            if (!e.done) {
                const float* qn = Qn.data() + static_cast<size_t>(i) * A;
                float best = qn[0];
                for (int a = 1; a < A; ++a) best = std::max(best, qn[a]);
                boot = e.gamma_n * (best + e.h_sn);
            }
            y[i] = e.reward_n + boot;
        }
        net_.forward(X.data(), B, ws_, Q.data());
        std::fill(dQ.begin(), dQ.end(), 0.0f);
        double loss = 0.0;
        for (int i = 0; i < B; ++i) {
            const ReplayEntry& e = buf.entry(idx[i]);
            float q = Q[static_cast<size_t>(i) * A + e.action] + e.h_s;
            float d = q - y[i];
            td[i] = d;
            float ad = std::fabs(d);
            loss += (ad <= 1.0f) ? 0.5 * d * d : ad - 0.5;
            dQ[static_cast<size_t>(i) * A + e.action] = std::clamp(d, -1.0f, 1.0f) / B;
        }
        loss /= B;
        if (!std::isfinite(loss)) {
            ++rep.skipped_nonfinite;
            continue;
        }
        net_.zero_grads();
        net_.backward(X.data(), B, ws_, dQ.data());
        double pre = nn::clip_grad_norm(net_.grads, cfg_.grad_norm_max);
        rep.max_grad_norm_postclip =
            std::max(rep.max_grad_norm_postclip, std::min(pre, cfg_.grad_norm_max));
        opt_.step(net_.params, net_.grads, cfg_.lr);
        ++grad_steps_;
        ++rep.steps_done;
        loss_acc += loss;
        ++loss_count;
        if (grad_steps_ % cfg_.target_update == 0) target_.params = net_.params;
        for (int i = 0; i < B; ++i) buf.update_priority(idx[i], std::fabs(td[i]));
    }
    if (loss_count > 0) rep.mean_loss = loss_acc / loss_count;
    return rep;
}

}  // namespace owl
