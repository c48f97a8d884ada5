#include "owl/poe.hpp"

#include <cmath>

namespace owl {

OptionModel build_option_model(int option_id, int target_feature, int feature_count,
                               std::span<const Precondition> proposals, const PoeConfig& cfg) {
    OptionModel m;
    m.option_id = option_id;
    m.target_feature = target_feature;
    m.feature_count = feature_count;
    for (const auto& p : proposals) {
        Expert e;
        e.target = target_feature;
        e.pred = Expert::Pred::SetOne;
        e.condition = p;
        e.mu = 0.5;
        e.sigma = 0.1;
        e.theta = e.mu;
        m.success.push_back(std::move(e));
    }
    {
        Expert blanket;
        blanket.target = target_feature;
        blanket.pred = Expert::Pred::SetZero;
        blanket.mu = 0.5;
        blanket.sigma = 0.001;
        blanket.theta = blanket.mu;
        m.success.push_back(std::move(blanket));
    }
    for (int i = 0; i < feature_count; ++i) {
        if (i == target_feature) continue;
        Expert nc;
        nc.target = i;
        nc.pred = Expert::Pred::NoChange;
        nc.mu = 0.5;
        nc.sigma = 0.1;
        nc.theta = nc.mu;
        m.conditional.push_back(nc);
        for (auto pred : {Expert::Pred::SetOne, Expert::Pred::SetZero}) {
            Expert ch;
            ch.target = i;
            ch.pred = pred;
            if (cfg.appendix_change_priors) {
                ch.mu = 0.5;
                ch.sigma = 0.001;
            } else {
                ch.mu = 0.001;
                ch.sigma = 0.1;
            }
            ch.theta = ch.mu;
            m.conditional.push_back(ch);
        }
    }
    return m;
}

namespace {

// Predicted value of one expert on a state, or nullopt on an unknown read.
std::optional<int> predicted_value(const Expert& e, const SimState& s) {
    switch (e.pred) {
        case Expert::Pred::SetOne: return 1;
        case Expert::Pred::SetZero: return 0;
        case Expert::Pred::NoChange: {
            if (e.target < 0 || e.target >= static_cast<int>(s.abs.bits.size()))
                return std::nullopt;
            int8_t b = s.abs.bits[e.target];
            if (b == kNone) return std::nullopt;
            return static_cast<int>(b);
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<std::array<double, 2>> poe_predict(std::span<const Expert* const> experts,
                                                 const SimState& s, double eta) {
    double lg0 = 0.0, lg1 = 0.0;
    bool any = false;
    const double l_hit = std::log(1.0 - eta), l_miss = std::log(eta);
    for (const Expert* e : experts) {
        if (e->condition) {
            auto active = e->condition->eval(s);
            if (!active) return std::nullopt;
            if (!*active) continue;
        }
        auto pv = predicted_value(*e, s);
        if (!pv) return std::nullopt;
        any = true;
        if (*pv == 1) {
            lg1 += e->theta * l_hit;
            lg0 += e->theta * l_miss;
        } else {
            lg0 += e->theta * l_hit;
            lg1 += e->theta * l_miss;
        }
    }
    if (!any) return std::array<double, 2>{0.5, 0.5};
    double m = std::max(lg0, lg1);
    double e0 = std::exp(lg0 - m), e1 = std::exp(lg1 - m);
    double z = e0 + e1;
    return std::array<double, 2>{e0 / z, e1 / z};
}

std::optional<std::array<double, 2>> poe_predict(std::span<const Expert> experts,
                                                 const SimState& s, double eta) {
    std::vector<const Expert*> ptrs;
    ptrs.reserve(experts.size());
    for (const auto& e : experts) ptrs.push_back(&e);
    return poe_predict(std::span<const Expert* const>(ptrs), s, eta);
}

namespace {

struct GroupScore {
    double loglik = 0.0;
    bool valid = true;
};

// log p(v_obs) for one feature group on one point, with per-expert gradient
// accumulation hooks.
template <class AccumFn>
GroupScore score_group(std::span<const Expert* const> experts, const SimState& s, int v_obs,
                       double eta, AccumFn&& accum) {
    GroupScore out;
    auto p = poe_predict(experts, s, eta);
    if (!p) {
        out.valid = false;
        return out;
    }
    out.loglik = std::log((*p)[v_obs]);
    const double delta = std::log(1.0 - eta) - std::log(eta);
    for (const Expert* e : experts) {
        if (e->condition) {
            auto active = e->condition->eval(s);
            if (!active || !*active) continue;
        }
        auto pv = predicted_value(*e, s);
        if (!pv) continue;
        double indicator = (v_obs == *pv) ? 1.0 : 0.0;
        accum(e, delta * (indicator - (*p)[*pv]));
    }
    return out;
}

std::vector<const Expert*> success_ptrs(const OptionModel& m) {
    std::vector<const Expert*> out;
    for (const auto& e : m.success) out.push_back(&e);
    return out;
}

}  // namespace

double map_objective(const OptionModel& model, std::span<const ModelDataPoint> data, double eta) {
    double obj = 0.0;
    for (const auto& e : model.success) obj += -0.5 * std::pow((e.theta - e.mu) / e.sigma, 2.0);
    for (const auto& e : model.conditional)
        obj += -0.5 * std::pow((e.theta - e.mu) / e.sigma, 2.0);

    auto succ = success_ptrs(model);
    auto noop = [](const Expert*, double) {};
    for (const auto& d : data) {
        SimState s{d.s, d.f_s};
        int8_t vo = d.f_s2.bits[model.target_feature];
        if (vo != kNone) {
            auto sc = score_group(succ, s, vo, eta, noop);
            if (sc.valid) obj += sc.loglik;
        }
        if (vo == 1) {
            for (int i = 0; i < model.feature_count; ++i) {
                if (i == model.target_feature) continue;
                int8_t vi = d.f_s2.bits[i];
                if (vi == kNone) continue;
                auto grp = model.conditional_for(i);
                auto sc = score_group(std::span<const Expert* const>(grp), s, vi, eta, noop);
                if (sc.valid) obj += sc.loglik;
            }
        }
    }
    return obj;
}

std::vector<double> map_gradient(const OptionModel& model, std::span<const ModelDataPoint> data,
                                 double eta) {
    std::vector<double> grad(model.success.size() + model.conditional.size(), 0.0);
    std::vector<const Expert*> order;
    for (const auto& e : model.success) order.push_back(&e);
    for (const auto& e : model.conditional) order.push_back(&e);
    auto index_of = [&](const Expert* e) {
        for (size_t i = 0; i < order.size(); ++i)
            if (order[i] == e) return i;
        return order.size();
    };
    for (size_t i = 0; i < order.size(); ++i)
        grad[i] += -(order[i]->theta - order[i]->mu) / (order[i]->sigma * order[i]->sigma);

    auto succ = success_ptrs(model);
    auto accum = [&](const Expert* e, double g) { grad[index_of(e)] += g; };
    for (const auto& d : data) {
        SimState s{d.s, d.f_s};
        int8_t vo = d.f_s2.bits[model.target_feature];
        if (vo != kNone) score_group(succ, s, vo, eta, accum);
        if (vo == 1) {
            for (int i = 0; i < model.feature_count; ++i) {
                if (i == model.target_feature) continue;
                int8_t vi = d.f_s2.bits[i];
                if (vi == kNone) continue;
                auto grp = model.conditional_for(i);
                score_group(std::span<const Expert* const>(grp), s, vi, eta, accum);
            }
        }
    }
    return grad;
}

FitReport map_fit(OptionModel& model, std::span<const ModelDataPoint> data, const PoeConfig& cfg) {
    FitReport rep;
    std::vector<Expert*> experts;
    for (auto& e : model.success) experts.push_back(&e);
    for (auto& e : model.conditional) experts.push_back(&e);
    std::vector<double> initial;
    for (const Expert* e : experts) initial.push_back(e->theta);

    auto set_thetas = [&](const std::vector<double>& t) {
        for (size_t i = 0; i < experts.size(); ++i) experts[i]->theta = t[i];
    };
    auto get_thetas = [&]() {
        std::vector<double> t;
        for (const Expert* e : experts) t.push_back(e->theta);
        return t;
    };

    double obj = map_objective(model, data, cfg.eta);
    double mult = 1.0;
    for (int step = 0; step < cfg.fit_steps; ++step) {
        auto grad = map_gradient(model, data, cfg.eta);
        for (double g : grad) {
            if (!std::isfinite(g)) {
                set_thetas(initial);
                rep.ok = false;
                rep.steps = step;
                rep.objective = map_objective(model, data, cfg.eta);
                return rep;
            }
        }
        auto base = get_thetas();
        bool accepted = false;
        for (int halving = 0; halving < 60; ++halving) {
            std::vector<double> trial(base.size());
            for (size_t i = 0; i < base.size(); ++i) {
                double s2 = experts[i]->sigma * experts[i]->sigma;
                trial[i] = std::max(0.0, base[i] + mult * cfg.fit_lr * s2 * grad[i]);
            }
            set_thetas(trial);
            double trial_obj = map_objective(model, data, cfg.eta);
            if (std::isfinite(trial_obj) && trial_obj >= obj - 1e-12) {
                obj = trial_obj;
                accepted = true;
                break;
            }
            mult *= 0.5;
        }
        if (!accepted) {
            set_thetas(base);
            rep.steps = step;
            break;
        }
        mult = std::min(mult * 1.5, 1.0);
        rep.steps = step + 1;
    }
    rep.objective = obj;
    return rep;
}

std::optional<AbstractState> sample_outcome(const OptionModel& model, const SimState& s,
                                            double eta, Rng& rng) {
    auto ps = poe_predict(std::span<const Expert>(model.success), s, eta);
    if (!ps) return std::nullopt;
    AbstractState out;
    out.bits.assign(static_cast<size_t>(model.feature_count), kNone);
    int vo = rng.bernoulli((*ps)[1]) ? 1 : 0;
    out.bits[model.target_feature] = static_cast<int8_t>(vo);
    if (vo == 0) return out;
    for (int i = 0; i < model.feature_count; ++i) {
        if (i == model.target_feature) continue;
        auto grp = model.conditional_for(i);
        auto pi = poe_predict(std::span<const Expert* const>(grp), s, eta);
        if (!pi) return std::nullopt;
        out.bits[i] = rng.bernoulli((*pi)[1]) ? 1 : 0;
    }
    return out;
}

}  // namespace owl
