#include <doctest.h>

#include <cmath>
#include <random>

#include "owl/net.hpp"
#include "owl/qlearner.hpp"

using namespace owl;

namespace {

template <class T>
std::vector<T> random_vec(size_t n, uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(u(gen));
    return v;
}

// Huber TD loss of a small batch against fixed targets, as a function of the
// network parameters only.
double td_loss(nn::DuelingQNet<double>& net, const std::vector<double>& X, int M,
               const std::vector<int>& actions, const std::vector<double>& targets) {
    nn::DuelingQNet<double>::Workspace ws;
    std::vector<double> Q(static_cast<size_t>(M) * net.actions());
    net.forward(X.data(), M, ws, Q.data());
    double loss = 0.0;
    for (int i = 0; i < M; ++i) {
        double d = Q[static_cast<size_t>(i) * net.actions() + actions[i]] - targets[i];
        loss += std::fabs(d) <= 1.0 ? 0.5 * d * d : std::fabs(d) - 0.5;
    }
    return loss / M;
}

}  // namespace

TEST_CASE("analytic TD gradients match central finite differences") {
    const int in = 4, hidden = 8, A = 3, M = 5;
    nn::DuelingQNet<double> net(in, hidden, A, 99);
    auto X = random_vec<double>(static_cast<size_t>(M) * in, 7);
    std::vector<int> actions{0, 2, 1, 0, 2};
    std::vector<double> targets{0.3, -0.7, 1.4, 0.0, 2.0};

    nn::DuelingQNet<double>::Workspace ws;
    std::vector<double> Q(static_cast<size_t>(M) * A), dQ(static_cast<size_t>(M) * A, 0.0);
    net.forward(X.data(), M, ws, Q.data());
    for (int i = 0; i < M; ++i) {
        double d = Q[static_cast<size_t>(i) * A + actions[i]] - targets[i];
        dQ[static_cast<size_t>(i) * A + actions[i]] = std::clamp(d, -1.0, 1.0) / M;
    }
    net.zero_grads();
    net.backward(X.data(), M, ws, dQ.data());
    auto analytic = net.grads;

    const double delta = 1e-4;
    for (size_t p = 0; p < net.param_count(); ++p) {
        double orig = net.params[p];
        net.params[p] = orig + delta;
        double lp = td_loss(net, X, M, actions, targets);
        net.params[p] = orig - delta;
        double lm = td_loss(net, X, M, actions, targets);
        net.params[p] = orig;
        double fd = (lp - lm) / (2.0 * delta);
        double denom = std::max({std::fabs(fd), std::fabs(analytic[p]), 1e-2});
        REQUIRE(std::fabs(fd - analytic[p]) / denom < 1e-3);
    }
}

TEST_CASE("dueling combination: action-mean of Q equals the value head") {
    const int A = 5;
    nn::DuelingQNet<float> net(6, 16, A, 3);
    nn::DuelingQNet<float>::Workspace ws;
    auto X = random_vec<float>(6 * 4, 5);
    std::vector<float> Q(4 * A);
    net.forward(X.data(), 4, ws, Q.data());
    for (int m = 0; m < 4; ++m) {
        double mean = 0.0;
        for (int a = 0; a < A; ++a) mean += Q[m * A + a];
        mean /= A;
        CHECK(mean == doctest::Approx(ws.v[m]).epsilon(1e-4));
    }
}

TEST_CASE("heuristic shaping shifts values but never the greedy action") {
    TrainConfig tc;
    QPolicy policy(12, 32, 4, 17, tc);
    Rng rng(5);
    for (int trial = 0; trial < 1000; ++trial) {
        auto obs = random_vec<float>(12, 1000 + trial);
        float h = static_cast<float>(5.0 * rng.uniform());
        auto q0 = policy.q_values(obs, 0.0f);
        auto qh = policy.q_values(obs, h);
        int arg0 = 0, argh = 0;
        for (int a = 1; a < 4; ++a) {
            if (q0[a] > q0[arg0]) arg0 = a;
            if (qh[a] > qh[argh]) argh = a;
        }
        REQUIRE(arg0 == argh);
        REQUIRE(argh == policy.greedy(obs));
        for (int a = 0; a < 4; ++a) REQUIRE(qh[a] == doctest::Approx(q0[a] + h).epsilon(1e-6));
    }
}

TEST_CASE("freshly initialized networks output near the shaping value") {
    TrainConfig tc;
    QPolicy policy(24, 256, 5, 23, tc);
    double acc = 0.0;
    int count = 0;
    for (int i = 0; i < 100; ++i) {
        auto obs = random_vec<float>(24, 40 + i);
        float h = static_cast<float>(5.0 * (i % 11) / 10.0);
        auto q = policy.q_values(obs, h);
        for (float v : q) {
            acc += std::fabs(v - h);
            ++count;
        }
    }
    CHECK(acc / count < 0.5);
}

TEST_CASE("target network parameters stay bitwise constant between copies") {
    TrainConfig tc;
    tc.batch = 8;
    tc.target_update = 1000;
    QPolicy policy(6, 16, 3, 29, tc);
    ReplayBuffer buf(32);
    std::vector<RawStep> ep;
    for (int i = 0; i < 6; ++i) {
        RawStep s;
        s.enc_s = random_vec<float>(6, 100 + i);
        s.enc_s2 = random_vec<float>(6, 200 + i);
        s.action = i % 3;
        s.reward_raw = (i == 5) ? 1.0 : 0.0;
        ep.push_back(s);
    }
    push_episode(buf, ep, true, 10.0, 0.99, 3);
    auto before = policy.target().params;
    Rng rng(3);
    policy.dqn_update(buf, 50, rng);
    CHECK(policy.target().params == before);
    CHECK(policy.net().params != before);
    // the 1000th gradient step triggers the copy
    policy.dqn_update(buf, 950, rng);
    CHECK(policy.target().params == policy.net().params);
}

TEST_CASE("gradients are clipped to the configured norm") {
    TrainConfig tc;
    tc.batch = 16;
    QPolicy policy(6, 16, 3, 31, tc);
    ReplayBuffer buf(64);
    std::vector<RawStep> ep;
    for (int i = 0; i < 16; ++i) {
        RawStep s;
        s.enc_s = random_vec<float>(6, 300 + i);
        s.enc_s2 = random_vec<float>(6, 400 + i);
        s.action = i % 3;
        s.reward_raw = 1000.0;  // engineered for a huge TD error
        ep.push_back(s);
    }
    push_episode(buf, ep, true, 10.0, 0.99, 1);
    Rng rng(5);
    auto rep = policy.dqn_update(buf, 20, rng);
    CHECK(rep.steps_done == 20);
    CHECK(rep.max_grad_norm_postclip <= 10.0 + 1e-6);
}

TEST_CASE("gradient clip helper scales exactly to the bound") {
    std::vector<double> g{3.0, 4.0};  // norm 5
    double pre = nn::clip_grad_norm(g, 10.0);
    CHECK(pre == doctest::Approx(5.0));
    CHECK(g[0] == doctest::Approx(3.0));
    std::vector<double> big{30.0, 40.0};  // norm 50
    pre = nn::clip_grad_norm(big, 10.0);
    CHECK(pre == doctest::Approx(50.0));
    CHECK(std::sqrt(big[0] * big[0] + big[1] * big[1]) == doctest::Approx(10.0));
}

TEST_CASE("identical seeds give identical networks, different seeds differ") {
    nn::DuelingQNet<float> a(8, 16, 3, 123), b(8, 16, 3, 123), c(8, 16, 3, 124);
    CHECK(a.params == b.params);
    CHECK(a.params != c.params);
}

TEST_CASE("non-finite batches are skipped and reported") {
    TrainConfig tc;
    tc.batch = 4;
    QPolicy policy(4, 8, 2, 37, tc);
    ReplayBuffer buf(8);
    ReplayEntry e;
    e.s = {0.1f, 0.2f, 0.3f, 0.4f};
    e.sn = e.s;
    e.action = 0;
    e.reward_n = std::numeric_limits<float>::quiet_NaN();
    e.gamma_n = 0.99f;
    e.done = 0;
    buf.push(e);
    auto before = policy.net().params;
    Rng rng(1);
    auto rep = policy.dqn_update(buf, 3, rng);
    CHECK(rep.skipped_nonfinite == 3);
    CHECK(rep.steps_done == 0);
    CHECK(policy.net().params == before);
}
