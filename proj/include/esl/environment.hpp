#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "esl/validation.hpp"

namespace esl {

using AgentId = int;
using StateId = int;
using ActionId = int;

/// Error raised by load_environment. `kind` distinguishes the three failure
/// classes the file format can produce.
class load_error : public std::runtime_error {
 public:
  enum class Kind { Syntax, Reference, Duplicate };

  load_error(Kind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// A named proposition with the set of states it holds at.
struct Proposition {
  std::string name;
  std::vector<bool> states;  // indexed by StateId
};

/// A finite multi-agent environment: states, initial states, per-agent
/// actions, a serial joint-action transition relation, per-agent observation
/// functions and a propositional assignment. Immutable after construction;
/// every operation on it is pure.
class Environment {
 public:
  std::vector<std::string> agents;
  std::vector<std::string> states;
  std::vector<StateId> initial;
  std::vector<std::vector<std::string>> actions;  // [agent][action]
  // observations[agent][state]; nullopt when the input file omitted an entry
  // (validate_environment reports it).
  std::vector<std::vector<std::optional<std::string>>> observations;
  std::vector<Proposition> propositions;

  struct Transition {
    StateId from;
    std::vector<ActionId> action;  // one action per agent, agent order
    StateId to;
  };
  std::vector<Transition> transitions;

  int agent_count() const { return static_cast<int>(agents.size()); }
  int state_count() const { return static_cast<int>(states.size()); }

  std::optional<AgentId> agent_id(const std::string& name) const;
  std::optional<StateId> state_id(const std::string& name) const;
  const Proposition* find_proposition(const std::string& name) const;

  /// Number of joint actions (product of per-agent action counts).
  /// Throws std::overflow_error if it does not fit in 64 bits.
  std::uint64_t joint_action_count() const;

  /// Mixed-radix index of a joint action, agent 0 most significant.
  std::uint64_t joint_action_index(const std::vector<ActionId>& action) const;

  /// Decodes a joint-action index back into one action per agent.
  std::vector<ActionId> joint_action_from_index(std::uint64_t index) const;

  bool operator==(const Environment& other) const;
};

/// Successor lists indexed by (state, joint-action index), deduplicated and
/// in first-encounter file order. Built once where transition lookups are
/// hot (validation, product construction).
struct TransitionIndex {
  explicit TransitionIndex(const Environment& env);

  const std::vector<StateId>& successors(StateId from, std::uint64_t joint_index) const {
    return table[from][joint_index];
  }

  std::vector<std::vector<std::vector<StateId>>> table;
};

/// Parses the JSON interchange format. `complete_self_loops` adds (s, a, s)
/// for every (state, joint action) pair with no successor instead of leaving
/// the environment non-serial.
Environment load_environment(const std::string& text, bool complete_self_loops = false);

/// Serializes back to the interchange format. load_environment followed by
/// serialize_environment is the identity up to whitespace.
std::string serialize_environment(const Environment& env, int indent = 2);

/// Reports every violated Environment invariant (seriality, observation
/// totality, initial nonempty, nonempty action sets). Violations are data,
/// not failures.
ValidationReport validate_environment(const Environment& env);

/// The partition of states induced by equal observation symbols for `agent`,
/// classes ordered by first-occurring state. Throws std::invalid_argument on
/// an unknown agent or a missing observation entry.
std::vector<std::vector<StateId>> observation_classes(const Environment& env,
                                                      const std::string& agent);
std::vector<std::vector<StateId>> observation_classes(const Environment& env, AgentId agent);

/// observation class id per state (same partition as observation_classes,
/// class ids in first-occurrence order).
std::vector<int> observation_class_ids(const Environment& env, AgentId agent);

}  // namespace esl
