#pragma once

#include <optional>
#include <string>
#include <vector>

#include "owl/config.hpp"
#include "owl/goals.hpp"
#include "owl/precondition.hpp"

namespace owl {

struct ProposalRequest {
    enum class Mode { Subgoal, Precondition };
    Mode mode = Mode::Subgoal;
    std::string game_name;
    GoalSpec target;
    std::string target_description;
    std::vector<GoalSpec> achieved;
    std::vector<std::string> achieved_descriptions;
    std::vector<SymbolicState> sample_states;     // one per room seen in the data
    std::vector<SymbolicState> positive_starts;   // start states of successful executions
    bool multi_controlled = false;                // selects the precondition prompt variant
};

struct ProposerConfig {
    enum class Backend { Stub, Llm, Replay };
    Backend backend = Backend::Stub;
    std::string endpoint;  // e.g. https://host[:port]
    std::string path = "/v1/chat/completions";
    std::string model;
    double temperature = 0.0;
    int max_retries = 2;
    std::string api_key_env = "OWL_LLM_API_KEY";
    std::string replay_dir;
    int timeout_seconds = 30;
};

// Proposal interface for sub-goal preconditions of hypothesized options and
// for precondition experts of success models. The LLM backend renders fixed
// prompt templates and parses the numbered replies; the stub backend is a
// deterministic offline stand-in; the replay backend reads recorded replies
// from disk so tests never touch the network.
class Proposer {
  public:
    Proposer(ProposerConfig cfg, const EnvConfig* env, const GoalSeq* goals)
        : cfg_(std::move(cfg)), env_(env), goals_(goals) {}

    // Returns the chosen achieved goal's id. Throws ConfigError when the
    // achieved set is empty.
    int propose_subgoal(const ProposalRequest& req);
    std::vector<Precondition> propose_preconditions(const ProposalRequest& req);

    std::string render_subgoal_prompt(const ProposalRequest& req) const;
    std::string render_precondition_prompt(const ProposalRequest& req) const;

    std::optional<int> parse_subgoal_reply(const std::string& reply,
                                           const ProposalRequest& req) const;
    std::vector<Precondition> parse_precondition_reply(const std::string& reply) const;

    int stub_subgoal(const ProposalRequest& req) const;
    std::vector<Precondition> stub_preconditions(const ProposalRequest& req) const;

    // Object-list rendering in the prompt syntax ("with at" style for the
    // single-controlled-object variant).
    static std::string render_state(const SymbolicState& s, bool with_at_syntax);

    static const char* subgoal_template();
    static const char* precondition_template_single();
    static const char* precondition_template_multi();

  private:
    std::string call_llm(const std::string& prompt) const;  // throws on transport failure
    std::string read_replay(const std::string& key) const;
    int room_graph_distance(int from, int to) const;

    ProposerConfig cfg_;
    const EnvConfig* env_;
    const GoalSeq* goals_;
};

}  // namespace owl
