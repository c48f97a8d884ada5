#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "owl/kernels.hpp"

namespace owl::nn {

// Dueling feed-forward Q-network. Feature trunk: two affine layers with
// layer normalization and a rectifier after each. Value and advantage heads:
// two affine layers at half the feature width, normalization and rectifier
// after the first only. Q = V + A - mean(A).
template <class T>
class DuelingQNet {
  public:
    DuelingQNet() = default;
    DuelingQNet(int input_dim, int hidden, int actions, uint64_t seed)
        : in_(input_dim), h_(hidden), hh_(hidden / 2), a_(actions) {
        layout();
        params.assign(total_, T(0));
        grads.assign(total_, T(0));
        init(seed);
    }

    int input_dim() const { return in_; }
    int hidden() const { return h_; }
    int actions() const { return a_; }
    size_t param_count() const { return total_; }

    std::vector<T> params, grads;

    struct Workspace {
        int cap = 0;
        std::vector<T> z1, y1, h1, z2, y2, h2;
        std::vector<T> zv1, yv, hv, v;
        std::vector<T> za1, ya, ha, adv;
        std::vector<T> m1, r1, m2, r2, mv, rv, ma, ra;
        // backward scratch
        std::vector<T> d_h2, d_y2, d_z2, d_h1, d_y1, d_z1;
        std::vector<T> d_hv, d_yv, d_zv1, d_ha, d_ya, d_za1, d_v, d_adv;
    };

    void ensure(Workspace& ws, int M) const {
        if (ws.cap >= M) return;
        ws.cap = M;
        auto rs = [&](std::vector<T>& v, size_t n) { v.assign(n, T(0)); };
        size_t mh = static_cast<size_t>(M) * h_, mhh = static_cast<size_t>(M) * hh_;
        size_t ma = static_cast<size_t>(M) * a_, m1 = static_cast<size_t>(M);
        rs(ws.z1, mh); rs(ws.y1, mh); rs(ws.h1, mh);
        rs(ws.z2, mh); rs(ws.y2, mh); rs(ws.h2, mh);
        rs(ws.zv1, mhh); rs(ws.yv, mhh); rs(ws.hv, mhh); rs(ws.v, m1);
        rs(ws.za1, mhh); rs(ws.ya, mhh); rs(ws.ha, mhh); rs(ws.adv, ma);
        rs(ws.m1, m1); rs(ws.r1, m1); rs(ws.m2, m1); rs(ws.r2, m1);
        rs(ws.mv, m1); rs(ws.rv, m1); rs(ws.ma, m1); rs(ws.ra, m1);
        rs(ws.d_h2, mh); rs(ws.d_y2, mh); rs(ws.d_z2, mh);
        rs(ws.d_h1, mh); rs(ws.d_y1, mh); rs(ws.d_z1, mh);
        rs(ws.d_hv, mhh); rs(ws.d_yv, mhh); rs(ws.d_zv1, mhh);
        rs(ws.d_ha, mhh); rs(ws.d_ya, mhh); rs(ws.d_za1, mhh);
        rs(ws.d_v, m1); rs(ws.d_adv, ma);
    }

    // Q[M x A]
    void forward(const T* X, int M, Workspace& ws, T* Q) const {
        ensure(ws, M);
        const T* p = params.data();
        affine_fwd(X, p + w1_, p + b1_, ws.z1.data(), M, in_, h_);
        layernorm_fwd(ws.z1.data(), p + g1_, p + be1_, ws.y1.data(), ws.m1.data(), ws.r1.data(), M, h_);
        relu_fwd(ws.y1.data(), ws.h1.data(), static_cast<size_t>(M) * h_);
        affine_fwd(ws.h1.data(), p + w2_, p + b2_, ws.z2.data(), M, h_, h_);
        layernorm_fwd(ws.z2.data(), p + g2_, p + be2_, ws.y2.data(), ws.m2.data(), ws.r2.data(), M, h_);
        relu_fwd(ws.y2.data(), ws.h2.data(), static_cast<size_t>(M) * h_);

        affine_fwd(ws.h2.data(), p + wv1_, p + bv1_, ws.zv1.data(), M, h_, hh_);
        layernorm_fwd(ws.zv1.data(), p + gv_, p + bev_, ws.yv.data(), ws.mv.data(), ws.rv.data(), M, hh_);
        relu_fwd(ws.yv.data(), ws.hv.data(), static_cast<size_t>(M) * hh_);
        affine_fwd(ws.hv.data(), p + wv2_, p + bv2_, ws.v.data(), M, hh_, 1);

        affine_fwd(ws.h2.data(), p + wa1_, p + ba1_, ws.za1.data(), M, h_, hh_);
        layernorm_fwd(ws.za1.data(), p + ga_, p + bea_, ws.ya.data(), ws.ma.data(), ws.ra.data(), M, hh_);
        relu_fwd(ws.ya.data(), ws.ha.data(), static_cast<size_t>(M) * hh_);
        affine_fwd(ws.ha.data(), p + wa2_, p + ba2_, ws.adv.data(), M, hh_, a_);

        for (int m = 0; m < M; ++m) {
            const T* adv = ws.adv.data() + static_cast<size_t>(m) * a_;
            T mean = T(0);
            for (int k = 0; k < a_; ++k) mean += adv[k];
            mean /= T(a_);
            T* q = Q + static_cast<size_t>(m) * a_;
            for (int k = 0; k < a_; ++k) q[k] = ws.v[m] + adv[k] - mean;
        }
    }

    // Accumulates parameter gradients for the batch used in the preceding
    // forward() with the same workspace. dX_out, when given, receives the
    // gradient with respect to the inputs (M x input_dim).
    void backward(const T* X, int M, Workspace& ws, const T* dQ, T* dX_out = nullptr) {
        const T* p = params.data();
        T* g = grads.data();
        for (int m = 0; m < M; ++m) {
            const T* dq = dQ + static_cast<size_t>(m) * a_;
            T s = T(0);
            for (int k = 0; k < a_; ++k) s += dq[k];
            ws.d_v[m] = s;
            T* da = ws.d_adv.data() + static_cast<size_t>(m) * a_;
            for (int k = 0; k < a_; ++k) da[k] = dq[k] - s / T(a_);
        }
        // value head
        grad_weights(ws.d_v.data(), ws.hv.data(), g + wv2_, g + bv2_, M, 1, hh_);
        matmul_nn(ws.d_v.data(), p + wv2_, ws.d_hv.data(), M, 1, hh_);
        relu_bwd(ws.yv.data(), ws.d_hv.data(), ws.d_yv.data(), static_cast<size_t>(M) * hh_);
        layernorm_bwd(ws.zv1.data(), p + gv_, ws.d_yv.data(), ws.mv.data(), ws.rv.data(),
                      ws.d_zv1.data(), g + gv_, g + bev_, M, hh_);
        grad_weights(ws.d_zv1.data(), ws.h2.data(), g + wv1_, g + bv1_, M, hh_, h_);
        matmul_nn(ws.d_zv1.data(), p + wv1_, ws.d_h2.data(), M, hh_, h_);
        // advantage head (accumulate into d_h2)
        grad_weights(ws.d_adv.data(), ws.ha.data(), g + wa2_, g + ba2_, M, a_, hh_);
        matmul_nn(ws.d_adv.data(), p + wa2_, ws.d_ha.data(), M, a_, hh_);
        relu_bwd(ws.ya.data(), ws.d_ha.data(), ws.d_ya.data(), static_cast<size_t>(M) * hh_);
        layernorm_bwd(ws.za1.data(), p + ga_, ws.d_ya.data(), ws.ma.data(), ws.ra.data(),
                      ws.d_za1.data(), g + ga_, g + bea_, M, hh_);
        grad_weights(ws.d_za1.data(), ws.h2.data(), g + wa1_, g + ba1_, M, hh_, h_);
        {
            std::vector<T> tmp(static_cast<size_t>(M) * h_);
            matmul_nn(ws.d_za1.data(), p + wa1_, tmp.data(), M, hh_, h_);
            for (size_t i = 0; i < tmp.size(); ++i) ws.d_h2[i] += tmp[i];
        }
        // trunk
        relu_bwd(ws.y2.data(), ws.d_h2.data(), ws.d_y2.data(), static_cast<size_t>(M) * h_);
        layernorm_bwd(ws.z2.data(), p + g2_, ws.d_y2.data(), ws.m2.data(), ws.r2.data(),
                      ws.d_z2.data(), g + g2_, g + be2_, M, h_);
        grad_weights(ws.d_z2.data(), ws.h1.data(), g + w2_, g + b2_, M, h_, h_);
        matmul_nn(ws.d_z2.data(), p + w2_, ws.d_h1.data(), M, h_, h_);
        relu_bwd(ws.y1.data(), ws.d_h1.data(), ws.d_y1.data(), static_cast<size_t>(M) * h_);
        layernorm_bwd(ws.z1.data(), p + g1_, ws.d_y1.data(), ws.m1.data(), ws.r1.data(),
                      ws.d_z1.data(), g + g1_, g + be1_, M, h_);
        grad_weights(ws.d_z1.data(), X, g + w1_, g + b1_, M, h_, in_);
        if (dX_out) matmul_nn(ws.d_z1.data(), p + w1_, dX_out, M, h_, in_);
    }

    void zero_grads() { std::fill(grads.begin(), grads.end(), T(0)); }

  private:
    void layout() {
        size_t off = 0;
        auto alloc = [&](size_t n) {
            size_t o = off;
            off += n;
            return o;
        };
        w1_ = alloc(static_cast<size_t>(h_) * in_); b1_ = alloc(h_);
        g1_ = alloc(h_); be1_ = alloc(h_);
        w2_ = alloc(static_cast<size_t>(h_) * h_); b2_ = alloc(h_);
        g2_ = alloc(h_); be2_ = alloc(h_);
        wv1_ = alloc(static_cast<size_t>(hh_) * h_); bv1_ = alloc(hh_);
        gv_ = alloc(hh_); bev_ = alloc(hh_);
        wv2_ = alloc(hh_); bv2_ = alloc(1);
        wa1_ = alloc(static_cast<size_t>(hh_) * h_); ba1_ = alloc(hh_);
        ga_ = alloc(hh_); bea_ = alloc(hh_);
        wa2_ = alloc(static_cast<size_t>(a_) * hh_); ba2_ = alloc(a_);
        total_ = off;
    }

    // Uniform fan-in scaling for affine layers; gain 1 / bias 0 for the
    // normalization layers. The two output layers get a 0.1x scale so that a
    // fresh network reads out near zero, which the heuristic-shaped value
    // Q + h(s) relies on. Draws happen in layout order with a fixed
    // generator so identical seeds give identical parameters.
    void init(uint64_t seed) {
        std::mt19937_64 gen(seed);
        auto fill_affine = [&](size_t w_off, size_t b_off, int fan_in, int rows, double scale) {
            double bound = scale / std::sqrt(static_cast<double>(fan_in));
            std::uniform_real_distribution<double> u(-bound, bound);
            for (size_t i = 0; i < static_cast<size_t>(rows) * fan_in; ++i)
                params[w_off + i] = static_cast<T>(u(gen));
            for (int i = 0; i < rows; ++i) params[b_off + i] = static_cast<T>(u(gen));
        };
        auto fill_ln = [&](size_t g_off, size_t b_off, int n) {
            for (int i = 0; i < n; ++i) params[g_off + i] = T(1);
            for (int i = 0; i < n; ++i) params[b_off + i] = T(0);
        };
        fill_affine(w1_, b1_, in_, h_, 1.0); fill_ln(g1_, be1_, h_);
        fill_affine(w2_, b2_, h_, h_, 1.0); fill_ln(g2_, be2_, h_);
        fill_affine(wv1_, bv1_, h_, hh_, 1.0); fill_ln(gv_, bev_, hh_);
        fill_affine(wv2_, bv2_, hh_, 1, 0.1);
        fill_affine(wa1_, ba1_, h_, hh_, 1.0); fill_ln(ga_, bea_, hh_);
        fill_affine(wa2_, ba2_, hh_, a_, 0.1);
    }

    int in_ = 0, h_ = 0, hh_ = 0, a_ = 0;
    size_t total_ = 0;
    size_t w1_ = 0, b1_ = 0, g1_ = 0, be1_ = 0;
    size_t w2_ = 0, b2_ = 0, g2_ = 0, be2_ = 0;
    size_t wv1_ = 0, bv1_ = 0, gv_ = 0, bev_ = 0, wv2_ = 0, bv2_ = 0;
    size_t wa1_ = 0, ba1_ = 0, ga_ = 0, bea_ = 0, wa2_ = 0, ba2_ = 0;
};

template <class T>
class Adam {
  public:
    Adam() = default;
    explicit Adam(size_t n) : m_(n, T(0)), v_(n, T(0)) {}

    void step(std::vector<T>& params, const std::vector<T>& grads, double lr,
              double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
        ++t_;
        double c1 = 1.0 - std::pow(beta1, t_), c2 = 1.0 - std::pow(beta2, t_);
        for (size_t i = 0; i < params.size(); ++i) {
            double g = static_cast<double>(grads[i]);
            double m = beta1 * static_cast<double>(m_[i]) + (1.0 - beta1) * g;
            double v = beta2 * static_cast<double>(v_[i]) + (1.0 - beta2) * g * g;
            m_[i] = static_cast<T>(m);
            v_[i] = static_cast<T>(v);
            params[i] -= static_cast<T>(lr * (m / c1) / (std::sqrt(v / c2) + eps));
        }
    }

    void reset() {
        std::fill(m_.begin(), m_.end(), T(0));
        std::fill(v_.begin(), v_.end(), T(0));
        t_ = 0;
    }

  private:
    std::vector<T> m_, v_;
    long t_ = 0;
};

// Scales gradients in place so their global L2 norm is at most max_norm.
// Returns the pre-clip norm.
template <class T>
double clip_grad_norm(std::vector<T>& grads, double max_norm) {
    double sq = 0.0;
    for (T g : grads) sq += static_cast<double>(g) * static_cast<double>(g);
    double norm = std::sqrt(sq);
    if (norm > max_norm && norm > 0.0) {
        T scale = static_cast<T>(max_norm / norm);
        for (T& g : grads) g *= scale;
    }
    return norm;
}

}  // namespace owl::nn
