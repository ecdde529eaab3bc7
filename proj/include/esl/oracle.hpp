#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "esl/checker.hpp"
#include "esl/environment.hpp"
#include "esl/formula.hpp"
#include "esl/product.hpp"

namespace esl::oracle {

/// Reference implementation used to validate the checker. It shares only the
/// Environment type and the formula AST with the main code path; pair
/// construction, epistemic relations and temporal evaluation are built
/// directly from the semantics, point by point, with no caching.

/// An occurring global state in the oracle's own representation: an
/// environment state plus per-agent strategies as explicit action sets.
struct OraclePair {
  StateId state;
  std::vector<int> strategy;  // per agent, index into OracleSystem::strategies
};

class OracleSystem {
 public:
  static constexpr std::size_t kPairGuard = 10'000;

  OracleSystem(const Environment& env, StrategyClass cls);

  const Environment& env() const { return env_; }
  std::size_t pair_count() const { return pairs_.size(); }
  const OraclePair& pair(std::size_t i) const { return pairs_[i]; }
  const std::vector<std::set<ActionId>>& strategy_of(AgentId agent, int index) const {
    return strategies_[agent][index];
  }

  std::vector<std::size_t> pair_successors(std::size_t i) const;
  bool locals_eq(std::size_t g, std::size_t h, const ExtendedAgent& who) const;

  /// Pair indices of initial global states in (profile, initial-state) order.
  const std::vector<std::size_t>& initial_pairs() const { return initial_; }

  /// State name plus per-agent, per-state action-name sets; used to compare
  /// counterexamples across the two implementations.
  struct Description {
    std::string state;
    std::vector<std::vector<std::set<std::string>>> choices;  // [agent][state]
    bool operator==(const Description&) const = default;
  };
  Description describe(std::size_t i) const;

 private:
  Environment env_;
  // strategies[agent][k][state] = enabled action set, canonical order
  std::vector<std::vector<std::vector<std::set<ActionId>>>> strategies_;
  std::vector<OraclePair> pairs_;
  std::vector<std::size_t> initial_;
  std::map<std::pair<StateId, std::vector<int>>, std::size_t> pair_index_;
};

using OracleContext = std::map<std::string, std::size_t>;  // variable -> pair index

/// Literal recursive evaluation of a core-expanded formula at one pair.
bool eval(const OracleSystem& sys, std::size_t pair, Formula f, const OracleContext& ctx);

struct NaiveVerdict {
  bool holds = false;
  std::optional<std::size_t> counterexample;  // pair index
};

/// Structural-recursion model check: holds iff the formula is satisfied at
/// every initial pair. Derived operators are expanded first. Throws
/// std::length_error when the pair count exceeds the guard.
NaiveVerdict naive_check(const Environment& env, StrategyClass cls, const OracleContext& ctx,
                         Formula f);
NaiveVerdict naive_check(const OracleSystem& sys, const OracleContext& ctx, Formula f);

/// Greatest fixpoint of X = AND_{i in G} D_{{i} union sigma(H)} (X and f),
/// computed by downward iteration on the checker's product system.
VertexSet gfp_relativized_ck(const ProductSystem& ps, const std::vector<std::string>& group_g,
                             const std::vector<std::string>& group_h, Formula f,
                             const Context& ctx);

// ---------------------------------------------------------------------------
// Random instance generation (pure functions of their seed).

struct GenBounds {
  int max_states = 4;
  int max_agents = 2;
  int max_actions_per_agent = 2;
  int max_props = 2;
  int max_obs_classes = 2;
  std::uint64_t seed = 0;
};

Environment random_environment(const GenBounds& bounds);

struct FormulaBounds {
  int max_depth = 4;
  int quantifier_budget = 2;
  bool closed = true;  // when false, loc may use the free variable "x0"
};

Formula random_formula(std::mt19937_64& rng, const Environment& env,
                       const FormulaBounds& bounds);

// ---------------------------------------------------------------------------
// Differential suite: checker vs naive oracle on random instances.

struct DiffOptions {
  std::uint64_t seed = 1;
  int cases = 200;
  std::optional<StrategyClass> only_class;  // default: cycle through all four
  std::size_t max_pairs = 400;              // redraw instances larger than this
  GenBounds bounds;
  FormulaBounds formula;
};

struct DiffResult {
  int cases_run = 0;
  int mismatches = 0;
  // first failing instance, serialized
  std::string failing_env;
  std::string failing_formula;
  std::string failing_class;
  std::string detail;
};

DiffResult run_differential(const DiffOptions& options, std::ostream* log = nullptr);

}  // namespace esl::oracle
