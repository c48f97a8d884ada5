#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "owl/agent.hpp"
#include "owl/harness.hpp"

using namespace owl;

namespace {

std::unique_ptr<OptionDef> option_with_stats(int id, int goal, int64_t n, double delta) {
    TrainConfig tc;
    auto o = std::make_unique<OptionDef>(id, goal, 5, std::vector<int>{}, tc);
    o->n_samples = n;
    int successes = static_cast<int>(delta * 100.0 + 0.5);
    for (int i = 0; i < 100; ++i) o->window.record(i < successes);
    return o;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("stability sets follow the strict-threshold definitions") {
    std::vector<std::unique_ptr<OptionDef>> opts;
    opts.push_back(option_with_stats(0, 2, 25000, 0.1));  // stable by samples, not good
    opts.push_back(option_with_stats(1, 2, 10, 0.8));     // stable and good
    opts.push_back(option_with_stats(2, 2, 10, 0.1));     // neither
    opts.push_back(option_with_stats(3, 1, 10, 0.9));     // other goal

    auto sets = stability_sets(opts, 2, 20000, 0.5);
    CHECK(sets.members == std::vector<int>{0, 1, 2});
    CHECK(sets.stable == std::vector<int>{0, 1});
    CHECK(sets.good == std::vector<int>{1});

    // good within stable within members, for any thresholds
    for (double n : {0.0, 100.0, 20000.0}) {
        for (double d : {0.0, 0.3, 0.9}) {
            auto s = stability_sets(opts, 2, n, d);
            for (int id : s.good)
                CHECK(std::find(s.stable.begin(), s.stable.end(), id) != s.stable.end());
            for (int id : s.stable)
                CHECK(std::find(s.members.begin(), s.members.end(), id) != s.members.end());
        }
    }

    // boundary: strict comparisons
    std::vector<std::unique_ptr<OptionDef>> edge;
    edge.push_back(option_with_stats(0, 0, 20000, 0.5));
    auto es = stability_sets(edge, 0, 20000, 0.5);
    CHECK(es.stable.empty());
    CHECK(es.good.empty());
}

TEST_CASE("adopted options keep model and dataset parity") {
    EnvConfig cfg = load_env_config("chain6");
    GoalSeq goals = goals_from_config(cfg);
    ProposerConfig pc;
    Proposer proposer(pc, &cfg, &goals);
    OwlOptions opts;
    opts.seed = 9;
    Agent agent(cfg, opts, &proposer);

    auto o1 = agent.make_option(0, std::nullopt, 1);
    CHECK(o1->action_count() == 5);  // primitives only at first
    agent.adopt_option(std::move(o1), {});
    auto o2 = agent.make_option(1, 0, 2);
    CHECK(o2->action_count() == 6);  // previous option becomes available
    CHECK(o2->precondition_goal == 0);
    agent.adopt_option(std::move(o2), {Precondition::subgoal_holds(0)});

    CHECK(agent.options().size() == 2);
    CHECK(agent.wm().models.size() == 2);
    for (const auto& o : agent.options()) {
        REQUIRE(agent.wm().model(o->id) != nullptr);
        CHECK(agent.wm().model(o->id)->target_feature == o->goal_id);
    }
    // the hypothesized option's model gates success on its precondition
    const OptionModel* m = agent.wm().model(1);
    bool has_subgoal_gate = false;
    for (const auto& e : m->success)
        if (e.condition && e.condition->kind == Precondition::Kind::SubgoalHolds &&
            e.condition->goal == 0)
            has_subgoal_gate = true;
    CHECK(has_subgoal_gate);
}

TEST_CASE("refit proposes success experts once positives exist") {
    EnvConfig cfg = load_env_config("chain6");
    GoalSeq goals = goals_from_config(cfg);
    ProposerConfig pc;
    Proposer proposer(pc, &cfg, &goals);
    OwlOptions opts;
    opts.seed = 10;
    Agent agent(cfg, opts, &proposer);
    agent.adopt_option(agent.make_option(0, std::nullopt, 3), {});
    OptionDef* o = agent.options()[0].get();
    REQUIRE_FALSE(agent.wm().model(0)->has_precondition_success_expert());

    // feed a successful transition whose start state stands on the homepad
    GridEnv env(cfg, 4);
    SymbolicState on_pad = env.reset();
    for (auto& obj : on_pad.objects)
        if (obj.type == "player") {
            obj.x = 96;
            obj.y = 32;
        }
    ModelDataPoint d;
    d.s = on_pad;
    d.f_s = abstract_state(on_pad, goals);
    REQUIRE(d.f_s.bits[0] == 1);
    d.f_s2 = d.f_s;
    o->model_data.push_back(d);
    o->model_positives = 1;

    bool new_positives = agent.refit_world_model();
    CHECK(new_positives);
    CHECK(agent.wm().model(0)->has_precondition_success_expert());
    // the fitted correct expert moved above its prior mode
    double max_theta = 0.0;
    for (const auto& e : agent.wm().model(0)->success)
        if (e.condition) max_theta = std::max(max_theta, e.theta);
    CHECK(max_theta > 0.5);
    // no new data: refit is a no-op
    std::string before = agent.wm().serialize();
    CHECK_FALSE(agent.refit_world_model());
    CHECK(agent.wm().serialize() == before);
}

TEST_CASE("agent checkpoints round-trip bitwise") {
    namespace fs = std::filesystem;
    EnvConfig cfg = load_env_config("chain6");
    GoalSeq goals = goals_from_config(cfg);
    ProposerConfig pc;
    Proposer proposer(pc, &cfg, &goals);
    OwlOptions opts;
    opts.seed = 11;
    Agent agent(cfg, opts, &proposer);
    agent.adopt_option(agent.make_option(0, std::nullopt, 5), {});
    agent.adopt_option(agent.make_option(1, 0, 6),
                       {Precondition::subgoal_holds(0)});
    OptionDef* o = agent.options()[0].get();
    o->n_samples = 1234;
    o->epsilon = 0.371;
    o->total_flushed = 6290;
    for (int i = 0; i < 37; ++i) o->record_completion(i % 3 == 0);
    GridEnv env(cfg, 2);
    agent.wm().table.update(abstract_state(env.reset(), goals), env.reset());

    std::string dir1 = (fs::temp_directory_path() / "owl_ckpt_a").string();
    std::string dir2 = (fs::temp_directory_path() / "owl_ckpt_b").string();
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    agent.save_checkpoint(dir1);
    auto loaded = Agent::load_checkpoint(dir1, opts, &proposer);
    loaded->save_checkpoint(dir2);
    for (const char* name : {"manifest.txt", "params.bin", "wm.txt", "envconfig.txt"})
        CHECK(slurp(dir1 + "/" + name) == slurp(dir2 + "/" + name));

    // loaded behavior matches: same stats and same greedy decisions
    OptionDef* lo = loaded->options()[0].get();
    CHECK(lo->n_samples == 1234);
    CHECK(lo->epsilon == doctest::Approx(0.371));
    CHECK(lo->window.count() == 37);
    std::vector<float> obs(agent.encoder().dim(), 0.3f);
    CHECK(lo->pi_real->greedy(obs) == o->pi_real->greedy(obs));
}

TEST_CASE("reinitialize_policies clears statistics but keeps the world model") {
    EnvConfig cfg = load_env_config("chain6");
    GoalSeq goals = goals_from_config(cfg);
    ProposerConfig pc;
    Proposer proposer(pc, &cfg, &goals);
    OwlOptions opts;
    opts.seed = 12;
    Agent agent(cfg, opts, &proposer);
    agent.adopt_option(agent.make_option(0, std::nullopt, 7), {});
    OptionDef* o = agent.options()[0].get();
    o->n_samples = 99;
    o->epsilon = 0.2;
    o->record_completion(true);
    auto params_before = o->pi_real->net().params;
    std::string wm_before = agent.wm().serialize();

    agent.reinitialize_policies();
    CHECK(o->n_samples == 0);
    CHECK(o->epsilon == 1.0);
    CHECK(o->window.count() == 0);
    CHECK(o->pi_real->net().params != params_before);
    CHECK(agent.wm().serialize() == wm_before);
}

TEST_CASE("random-policy evaluation runs the configured episode count") {
    EnvConfig cfg = load_env_config("mini");
    GoalSeq goals = goals_from_config(cfg);
    ProposerConfig pc;
    Proposer proposer(pc, &cfg, &goals);
    OwlOptions opts;
    opts.seed = 14;
    Agent agent(cfg, opts, &proposer);
    double rate = agent.eval_random_goal(0, 10);
    CHECK(rate >= 0.0);
    CHECK(rate <= 1.0);
}
