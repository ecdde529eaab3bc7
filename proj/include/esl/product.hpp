#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "esl/environment.hpp"
#include "esl/formula.hpp"
#include "esl/strategy.hpp"

namespace esl {

using VertexId = int;
using ProfileIndex = std::uint64_t;

class resource_limit_error : public std::runtime_error {
 public:
  resource_limit_error(const std::string& message, std::uint64_t attempted_profiles)
      : std::runtime_error(message), attempted_profiles_(attempted_profiles) {}
  std::uint64_t attempted_profiles() const { return attempted_profiles_; }

 private:
  std::uint64_t attempted_profiles_;
};

/// A reachable global state: an environment state plus the (run-constant)
/// strategy profile, addressed by its canonical enumeration index.
struct GlobalState {
  StateId env_state;
  ProfileIndex profile;

  bool operator==(const GlobalState&) const = default;
};

/// The finite reachable fragment of the strategy-space system for one
/// environment and strategy class: vertices are (state, profile) pairs
/// reachable from initial-state/profile seeds, edges follow transitions
/// enabled by the profile, and profiles never change along edges. Immutable
/// after construction.
class ProductSystem {
 public:
  static constexpr std::uint64_t kDefaultVertexCap = 10'000'000;

  ProductSystem(Environment env, StrategyClass cls,
                std::uint64_t vertex_cap = kDefaultVertexCap);

  const Environment& env() const { return env_; }
  StrategyClass cls() const { return cls_; }
  const StrategySpace& strategies() const { return space_; }

  int vertex_count() const { return static_cast<int>(vertices_.size()); }
  const GlobalState& vertex(VertexId v) const { return vertices_[v]; }
  const std::vector<VertexId>& initial_vertices() const { return initial_; }
  const std::vector<VertexId>& successors(VertexId v) const { return succ_[v]; }
  const std::vector<VertexId>& predecessors(VertexId v) const { return pred_[v]; }
  std::size_t edge_count() const { return edge_count_; }
  std::uint64_t profile_count() const { return space_.profile_count(); }

  /// BFS discovery parent and the joint action that witnessed the edge;
  /// parent is -1 for initial vertices.
  struct Discovery {
    VertexId parent;
    std::vector<ActionId> action;
  };
  const Discovery& discovery(VertexId v) const { return discovery_[v]; }

  /// Local-state equality between two vertices for a base agent (equal
  /// observation), a strategic agent (equal strategy) or the environment
  /// agent (equal state).
  bool locals_equal(VertexId g, VertexId h, const ExtendedAgent& who) const;

  /// Dense per-vertex identifier of `who`'s local state; locals_equal(g,h,w)
  /// iff local_state_id(g,w) == local_state_id(h,w).
  std::uint64_t local_state_id(VertexId v, const ExtendedAgent& who) const;

  /// observation class id of `agent` at vertex `v` (base-agent local state).
  int observation_id(VertexId v, AgentId agent) const { return obs_ids_[agent][vertex(v).env_state]; }

  StrategyProfile profile_of(VertexId v) const { return space_.profile(vertex(v).profile); }

  /// "(s0, a:stay)": state plus a compact per-agent strategy rendering.
  std::string describe(VertexId v) const;
  std::string describe_profile(ProfileIndex p) const;

  /// JSON dump per the external interface: vertices with per-agent
  /// strategies, edges as index pairs, initial indices.
  std::string dump_json(int indent = 2) const;

 private:
  AgentId resolve_agent(const ExtendedAgent& who) const;

  Environment env_;
  StrategyClass cls_;
  StrategySpace space_;
  std::vector<std::vector<int>> obs_ids_;  // [agent][state]
  std::vector<GlobalState> vertices_;
  std::vector<VertexId> initial_;
  std::vector<std::vector<VertexId>> succ_;
  std::vector<std::vector<VertexId>> pred_;
  std::vector<Discovery> discovery_;
  std::size_t edge_count_ = 0;
};

/// Validates the environment (throws std::invalid_argument on violations)
/// and builds the reachable product.
ProductSystem build_product(const Environment& env, StrategyClass cls,
                            std::uint64_t vertex_cap = ProductSystem::kDefaultVertexCap);

}  // namespace esl
