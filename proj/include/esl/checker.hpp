#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "esl/formula.hpp"
#include "esl/product.hpp"

namespace esl {

/// Fixed-size bitset over the vertices of one product system.
class VertexSet {
 public:
  VertexSet() = default;
  explicit VertexSet(std::size_t n) : n_(n), words_((n + 63) / 64, 0) {}

  static VertexSet full(std::size_t n) {
    VertexSet s(n);
    for (auto& w : s.words_) w = ~0ULL;
    s.trim();
    return s;
  }

  std::size_t size() const { return n_; }
  bool test(int i) const { return (words_[i >> 6] >> (i & 63)) & 1ULL; }
  void set(int i) { words_[i >> 6] |= 1ULL << (i & 63); }
  void reset(int i) { words_[i >> 6] &= ~(1ULL << (i & 63)); }

  std::size_t count() const;
  bool all() const { return count() == n_; }
  bool none() const { return count() == 0; }

  VertexSet& operator|=(const VertexSet& o);
  VertexSet& operator&=(const VertexSet& o);
  VertexSet complement() const;

  std::vector<int> members() const;

  bool operator==(const VertexSet&) const = default;

 private:
  void trim() {
    if (n_ % 64 != 0 && !words_.empty()) words_.back() &= (1ULL << (n_ % 64)) - 1;
  }
  std::size_t n_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Partial assignment of variables to product vertices (the evaluation
/// context Gamma).
using Context = std::map<std::string, VertexId>;

struct CheckStats {
  std::uint64_t profile_count = 0;
  std::size_t vertex_count = 0;
  std::size_t edge_count = 0;
  std::size_t cache_entries = 0;
  std::size_t cache_lookups = 0;
  std::size_t cache_hits = 0;
  std::size_t fixpoint_rounds_max = 0;
  double eval_seconds = 0.0;
};

struct Verdict {
  bool holds = false;
  std::optional<VertexId> counterexample;  // least-index failing initial vertex
  std::vector<std::pair<std::string, VertexId>> witness_bindings;
  CheckStats stats;
};

/// Labels a product system with satisfaction sets, bottom-up per subformula,
/// memoizing each (node, context restricted to its free variables) pair.
/// Pure with respect to the product; one evaluator per thread.
class Evaluator {
 public:
  explicit Evaluator(const ProductSystem& ps, bool memoize = true)
      : ps_(ps), memoize_(memoize) {}

  /// Satisfaction set of a core-expanded formula. Throws
  /// std::invalid_argument on derived operators, unbound variables or
  /// unknown agents/propositions.
  VertexSet sat(Formula f, const Context& ctx);

  /// Least-index representatives of the signature classes an exists-formula's
  /// bound vertex can be told apart by; binding any vertex of a class gives
  /// the same satisfaction set as binding its representative.
  std::vector<VertexId> exists_representatives(Formula exists_formula);

  std::size_t cache_entries() const { return cache_.size(); }
  std::size_t cache_lookups() const { return cache_lookups_; }
  std::size_t cache_hits() const { return cache_hits_; }
  std::size_t fixpoint_rounds_max() const { return fixpoint_rounds_max_; }

 private:
  VertexSet evaluate(Formula f, const Context& ctx);
  VertexSet sat_prop(const std::string& name) const;
  VertexSet preimage(const VertexSet& s) const;
  VertexSet sat_eu(Formula phi, Formula psi, const Context& ctx);
  VertexSet sat_au(Formula phi, Formula psi, const Context& ctx);
  VertexSet sat_dk(const AgentGroup& group, const VertexSet& body) const;
  VertexSet sat_ck(const AgentGroup& group, const VertexSet& body) const;
  VertexSet sat_exists(Formula f, const Context& ctx);

  struct Key {
    const FormulaNode* node;
    std::vector<std::pair<std::string, VertexId>> bindings;
    bool operator==(const Key&) const = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };

  const ProductSystem& ps_;
  bool memoize_;
  std::unordered_map<Key, VertexSet, KeyHash> cache_;
  std::unordered_map<const FormulaNode*, std::set<std::string>> free_vars_;
  std::size_t cache_lookups_ = 0;
  std::size_t cache_hits_ = 0;
  std::size_t fixpoint_rounds_max_ = 0;
};

/// Least superset of `seed` closed under the local-state equivalences of
/// every member of `group` (the union relation, closed transitively). Throws
/// std::invalid_argument on an empty group.
VertexSet common_closure(const ProductSystem& ps, const AgentGroup& group,
                         const VertexSet& seed);

/// Decides whether every initial vertex satisfies `f` (expanding derived
/// operators first). The context must cover the free variables of `f`.
Verdict check(const ProductSystem& ps, const Context& ctx, Formula f, bool memoize = true);

/// Convenience: validates, builds the product and checks.
Verdict check(const Environment& env, StrategyClass cls, const Context& ctx, Formula f,
              std::uint64_t vertex_cap = ProductSystem::kDefaultVertexCap);

}  // namespace esl
