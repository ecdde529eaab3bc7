#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esl/environment.hpp"

namespace esl {

enum class StrategyClass { All, Det, Unif, UnifDet };

/// Accepts "all", "det", "unif", "unif-det" and "unif_det".
StrategyClass parse_strategy_class(const std::string& tag);
std::string strategy_class_name(StrategyClass cls);

/// A memoryless strategy for one agent: a nonempty set of enabled actions per
/// state, stored as bitmasks over the agent's action list.
struct Strategy {
  AgentId agent = -1;
  std::vector<std::uint32_t> choice_masks;  // indexed by StateId

  std::vector<ActionId> choice(StateId s) const;
  bool is_deterministic() const;
  bool is_uniform(const Environment& env) const;

  bool operator==(const Strategy&) const = default;
};

/// One strategy per agent, in agent order. Fixed for the duration of a run.
struct StrategyProfile {
  std::vector<Strategy> strategies;

  bool operator==(const StrategyProfile&) const = default;
};

/// The canonically ordered strategy space of one agent for one class.
/// Strategies are addressed by index; the order is lexicographic over states
/// in file order with action subsets ordered by bitmask value (uniform
/// classes choose per observation class, which induces the same state
/// order). Index identity doubles as extensional strategy equality.
class AgentStrategySpace {
 public:
  AgentStrategySpace(const Environment& env, AgentId agent, StrategyClass cls);

  std::uint64_t count() const { return count_; }

  /// Action mask chosen at `state` by the strategy with the given index.
  std::uint32_t mask_for(std::uint64_t strategy_index, StateId state) const;

  Strategy strategy(std::uint64_t strategy_index) const;

 private:
  AgentId agent_;
  int num_states_;
  int num_slots_;                      // states, or observation classes
  std::vector<int> slot_of_state_;     // StateId -> slot
  std::vector<std::uint32_t> domain_;  // ordered candidate masks per slot
  std::vector<std::uint64_t> stride_;  // slot -> domain^(slots below it)
  std::uint64_t count_;
};

/// Strategy spaces of all agents plus the joint profile index arithmetic
/// (agent 0 most significant). Profile indices are the canonical enumeration
/// order of enumerate_profiles.
class StrategySpace {
 public:
  StrategySpace(const Environment& env, StrategyClass cls);

  StrategyClass cls() const { return cls_; }
  std::uint64_t profile_count() const { return profile_count_; }
  const AgentStrategySpace& agent(AgentId a) const { return agents_[a]; }
  int agent_count() const { return static_cast<int>(agents_.size()); }

  std::uint64_t agent_strategy_index(std::uint64_t profile_index, AgentId a) const;
  std::uint32_t mask_for(std::uint64_t profile_index, AgentId a, StateId state) const;
  StrategyProfile profile(std::uint64_t profile_index) const;

 private:
  StrategyClass cls_;
  std::vector<AgentStrategySpace> agents_;
  std::vector<std::uint64_t> profile_stride_;
  std::uint64_t profile_count_;
};

/// Streams the strategies of one agent in canonical order.
class StrategyStream {
 public:
  StrategyStream(const Environment& env, const std::string& agent, StrategyClass cls);
  StrategyStream(const Environment& env, AgentId agent, StrategyClass cls);

  bool next(Strategy& out);

 private:
  AgentStrategySpace space_;
  std::uint64_t index_ = 0;
};

/// Streams strategy profiles in canonical order (cartesian product of the
/// per-agent streams).
class ProfileStream {
 public:
  ProfileStream(const Environment& env, StrategyClass cls);

  bool next(StrategyProfile& out);
  std::uint64_t count() const { return space_.profile_count(); }

 private:
  StrategySpace space_;
  std::uint64_t index_ = 0;
};

/// Closed-form count of the per-agent enumeration. Throws std::overflow_error
/// when the count does not fit 64 bits and std::invalid_argument on an
/// unknown agent.
std::uint64_t count_agent_strategies(const Environment& env, const std::string& agent,
                                     StrategyClass cls);
std::uint64_t count_profiles(const Environment& env, StrategyClass cls);

/// Materialized enumeration (small inputs / tests).
std::vector<Strategy> enumerate_agent_strategies(const Environment& env,
                                                 const std::string& agent, StrategyClass cls);

}  // namespace esl
