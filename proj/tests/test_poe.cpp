#include <doctest.h>

#include <cmath>

#include "owl/poe.hpp"

using namespace owl;

namespace {

SimState full_state(std::vector<int8_t> bits) {
    SymbolicState s;
    s.room = 0;
    s.objects.push_back({"player", 8, 8, 8, 8, false});
    s.objects.push_back({"pad", 8, 8, 8, 8, true});
    AbstractState a;
    a.bits = std::move(bits);
    return SimState{s, a};
}

Expert make_expert(int target, Expert::Pred pred, double theta,
                   std::optional<Precondition> cond = std::nullopt) {
    Expert e;
    e.target = target;
    e.pred = pred;
    e.theta = theta;
    e.mu = 0.5;
    e.sigma = 0.1;
    e.condition = std::move(cond);
    return e;
}

// Brute-force evaluation of the weighted product over {0,1} with explicit
// normalization, kept independent of the implementation path it checks.
std::array<double, 2> brute_force(const std::vector<Expert>& experts, const SimState& s,
                                  double eta) {
    double p[2] = {1.0, 1.0};
    bool any = false;
    for (const auto& e : experts) {
        bool active = true;
        if (e.condition) active = *e.condition->eval(s);
        if (!active) continue;
        int pv = 0;
        if (e.pred == Expert::Pred::SetOne) pv = 1;
        else if (e.pred == Expert::Pred::SetZero) pv = 0;
        else pv = s.abs.bits[e.target];
        any = true;
        for (int v = 0; v < 2; ++v) {
            double q = (v == pv) ? 1.0 - eta : eta;
            p[v] *= std::pow(q, e.theta);
        }
    }
    if (!any) return {0.5, 0.5};
    double z = p[0] + p[1];
    return {p[0] / z, p[1] / z};
}

}  // namespace

TEST_CASE("single active expert with unit weight gives 1 - eta") {
    auto s = full_state({0});
    std::vector<Expert> experts{make_expert(0, Expert::Pred::SetOne, 1.0)};
    auto p = poe_predict(experts, s, 0.01);
    REQUIRE(p.has_value());
    CHECK((*p)[1] == doctest::Approx(0.99).epsilon(1e-12));
}

TEST_CASE("all-zero weights and empty products are uniform") {
    auto s = full_state({0});
    std::vector<Expert> zero{make_expert(0, Expert::Pred::SetOne, 0.0),
                             make_expert(0, Expert::Pred::SetZero, 0.0)};
    auto p = poe_predict(zero, s, 0.01);
    CHECK((*p)[1] == doctest::Approx(0.5));
    std::vector<Expert> none;
    auto q = poe_predict(none, s, 0.01);
    CHECK((*q)[0] == doctest::Approx(0.5));
}

TEST_CASE("opposing equal-weight experts cancel") {
    auto s = full_state({0});
    std::vector<Expert> experts{make_expert(0, Expert::Pred::SetOne, 1.7),
                                make_expert(0, Expert::Pred::SetZero, 1.7)};
    auto p = poe_predict(experts, s, 0.01);
    CHECK((*p)[1] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("poe matches brute force on 1000 random expert sets") {
    Rng rng(42);
    for (int trial = 0; trial < 1000; ++trial) {
        int nbits = 1 + rng.uniform_int(4);
        std::vector<int8_t> bits;
        for (int i = 0; i < nbits; ++i) bits.push_back(static_cast<int8_t>(rng.uniform_int(2)));
        auto s = full_state(bits);
        int target = rng.uniform_int(nbits);
        int n_experts = rng.uniform_int(6);
        std::vector<Expert> experts;
        for (int i = 0; i < n_experts; ++i) {
            auto pred = static_cast<Expert::Pred>(rng.uniform_int(3));
            double theta = 3.0 * rng.uniform();
            std::optional<Precondition> cond;
            int c = rng.uniform_int(3);
            if (c == 1) cond = Precondition::subgoal_holds(rng.uniform_int(nbits));
            if (c == 2) cond = Precondition::any_touching("player", "pad");
            experts.push_back(make_expert(target, pred, theta, cond));
        }
        double eta = 0.001 + 0.3 * rng.uniform();
        auto got = poe_predict(experts, s, eta);
        auto want = brute_force(experts, s, eta);
        REQUIRE(got.has_value());
        REQUIRE(std::fabs((*got)[0] - want[0]) < 1e-12);
        REQUIRE(std::fabs((*got)[1] - want[1]) < 1e-12);
        REQUIRE(std::fabs((*got)[0] + (*got)[1] - 1.0) < 1e-12);
    }
}

TEST_CASE("gated-off experts contribute nothing") {
    auto s = full_state({0, 0});
    std::vector<Expert> experts{
        make_expert(0, Expert::Pred::SetOne, 2.0, Precondition::subgoal_holds(1)),
        make_expert(0, Expert::Pred::SetZero, 1.0)};
    auto p = poe_predict(experts, s, 0.01);
    // only the SetZero expert acts
    CHECK((*p)[0] == doctest::Approx(0.99).epsilon(1e-9));
}

TEST_CASE("None reads raise the access signal") {
    SimState partial{std::nullopt, AbstractState{{kNone, 0}}};
    std::vector<Expert> no_change{make_expert(0, Expert::Pred::NoChange, 1.0)};
    CHECK_FALSE(poe_predict(no_change, partial, 0.01).has_value());
    std::vector<Expert> gated{
        make_expert(1, Expert::Pred::SetOne, 1.0, Precondition::any_touching("player", "pad"))};
    CHECK_FALSE(poe_predict(gated, partial, 0.01).has_value());
    // a SubgoalHolds gate on a known bit stays evaluable
    std::vector<Expert> ok{make_expert(1, Expert::Pred::SetOne, 1.0,
                                       Precondition::subgoal_holds(1))};
    CHECK(poe_predict(ok, partial, 0.01).has_value());
}

TEST_CASE("model construction counts experts as specified") {
    PoeConfig cfg;
    std::vector<Precondition> proposals;
    for (int i = 0; i < 4; ++i) proposals.push_back(Precondition::room_exist(i));
    OptionModel m = build_option_model(7, 2, 6, proposals, cfg);
    CHECK(m.success.size() == 5);  // 4 + blanket
    CHECK(m.conditional.size() == 15);  // 5 other features x 3
    int blankets = 0;
    for (const auto& e : m.success)
        if (!e.condition) {
            ++blankets;
            CHECK(e.sigma == doctest::Approx(0.001));
            CHECK(e.mu == doctest::Approx(0.5));
        }
    CHECK(blankets == 1);
    // main-text prior for the change experts by default
    for (const auto& e : m.conditional) {
        if (e.pred == Expert::Pred::NoChange) {
            CHECK(e.mu == doctest::Approx(0.5));
            CHECK(e.sigma == doctest::Approx(0.1));
        } else {
            CHECK(e.mu == doctest::Approx(0.001));
            CHECK(e.sigma == doctest::Approx(0.1));
        }
    }
    PoeConfig app;
    app.appendix_change_priors = true;
    OptionModel m2 = build_option_model(7, 2, 6, proposals, app);
    for (const auto& e : m2.conditional)
        if (e.pred != Expert::Pred::NoChange) {
            CHECK(e.mu == doctest::Approx(0.5));
            CHECK(e.sigma == doctest::Approx(0.001));
        }
}

TEST_CASE("sampled outcomes follow the fitted Bernoullis") {
    PoeConfig cfg;
    // blanket-dominated model: no preconditions at all
    OptionModel fail_model = build_option_model(0, 0, 2, {}, cfg);
    auto s = full_state({0, 0});
    Rng rng(7);
    int ones = 0;
    const int draws = 10000;
    auto ps = poe_predict(std::span<const Expert>(fail_model.success), s, cfg.eta);
    for (int i = 0; i < draws; ++i) {
        auto f = sample_outcome(fail_model, s, cfg.eta, rng);
        REQUIRE(f.has_value());
        if (f->bits[0] == 1) ++ones;
        else CHECK(f->bits[1] == kNone);  // failure leaves other features unknown
    }
    double freq = static_cast<double>(ones) / draws;
    CHECK(std::fabs(freq - (*ps)[1]) < 0.02);

    // forced success via a large-weight precondition expert
    OptionModel force = build_option_model(0, 0, 2, {}, cfg);
    Expert strong = make_expert(0, Expert::Pred::SetOne, 50.0);
    force.success.insert(force.success.begin(), strong);
    for (int i = 0; i < 200; ++i) {
        auto f = sample_outcome(force, s, cfg.eta, rng);
        REQUIRE(f->bits[0] == 1);
        CHECK(f->bits[1] != kNone);
    }
}

TEST_CASE("no-change conditional experts preserve current bits with prior-computable rate") {
    PoeConfig cfg;
    OptionModel m = build_option_model(0, 0, 2, {}, cfg);
    // condition on success: force f0 = 1
    Expert strong = make_expert(0, Expert::Pred::SetOne, 500.0);
    m.success.insert(m.success.begin(), strong);
    auto s = full_state({0, 1});
    // with zero data the conditional weights sit at the prior modes:
    // no-change 0.5, set-one 0.001, set-zero 0.001; current bit is 1, so
    // no-change and set-one predict 1, set-zero predicts 0
    double l1 = (0.5 + 0.001) * std::log(1 - cfg.eta) + 0.001 * std::log(cfg.eta);
    double l0 = (0.5 + 0.001) * std::log(cfg.eta) + 0.001 * std::log(1 - cfg.eta);
    double expect1 = std::exp(l1) / (std::exp(l1) + std::exp(l0));
    Rng rng(11);
    int keep = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) {
        auto f = sample_outcome(m, s, cfg.eta, rng);
        REQUIRE(f->bits[0] == 1);
        if (f->bits[1] == 1) ++keep;
    }
    CHECK(std::fabs(static_cast<double>(keep) / draws - expect1) < 0.02);
}
