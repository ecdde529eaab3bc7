#include "esl/checker.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <deque>

namespace esl {

std::size_t VertexSet::count() const {
  std::size_t n = 0;
  for (std::uint64_t w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

VertexSet& VertexSet::operator|=(const VertexSet& o) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= o.words_[i];
  return *this;
}

VertexSet& VertexSet::operator&=(const VertexSet& o) {
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
  return *this;
}

VertexSet VertexSet::complement() const {
  VertexSet out(n_);
  for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] = ~words_[i];
  out.trim();
  return out;
}

std::vector<int> VertexSet::members() const {
  std::vector<int> out;
  for (std::size_t i = 0; i < n_; ++i)
    if (test(static_cast<int>(i))) out.push_back(static_cast<int>(i));
  return out;
}

std::size_t Evaluator::KeyHash::operator()(const Key& k) const {
  std::size_t h = std::hash<const void*>{}(k.node);
  for (const auto& [name, v] : k.bindings) {
    h ^= std::hash<std::string>{}(name) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= std::hash<int>{}(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  }
  return h;
}

VertexSet Evaluator::sat(Formula f, const Context& ctx) {
  return evaluate(f, ctx);
}

VertexSet Evaluator::sat_prop(const std::string& name) const {
  const Proposition* p = ps_.env().find_proposition(name);
  if (!p) throw std::invalid_argument("undeclared proposition \"" + name + "\"");
  VertexSet out(ps_.vertex_count());
  for (VertexId v = 0; v < ps_.vertex_count(); ++v)
    if (p->states[ps_.vertex(v).env_state]) out.set(v);
  return out;
}

VertexSet Evaluator::preimage(const VertexSet& s) const {
  VertexSet out(ps_.vertex_count());
  for (int v : s.members())
    for (VertexId u : ps_.predecessors(v)) out.set(u);
  return out;
}

// least fixpoint of X = psi | (phi & EX X)
VertexSet Evaluator::sat_eu(Formula phi, Formula psi, const Context& ctx) {
  VertexSet phi_set = evaluate(phi, ctx);
  VertexSet x = evaluate(psi, ctx);
  std::size_t rounds = 0;
  for (;;) {
    ++rounds;
    VertexSet grown = x;
    VertexSet pre = preimage(x);
    pre &= phi_set;
    grown |= pre;
    if (grown == x) break;
    x = grown;
  }
  fixpoint_rounds_max_ = std::max(fixpoint_rounds_max_, rounds);
  return x;
}

// least fixpoint of X = psi | (phi & AX X)
VertexSet Evaluator::sat_au(Formula phi, Formula psi, const Context& ctx) {
  VertexSet phi_set = evaluate(phi, ctx);
  VertexSet x = evaluate(psi, ctx);
  std::size_t rounds = 0;
  for (;;) {
    ++rounds;
    VertexSet grown = x;
    for (VertexId v = 0; v < ps_.vertex_count(); ++v) {
      if (grown.test(v) || !phi_set.test(v)) continue;
      bool every = true;
      for (VertexId w : ps_.successors(v))
        if (!x.test(w)) {
          every = false;
          break;
        }
      if (every) grown.set(v);
    }
    if (grown == x) break;
    x = grown;
  }
  fixpoint_rounds_max_ = std::max(fixpoint_rounds_max_, rounds);
  return x;
}

VertexSet Evaluator::sat_dk(const AgentGroup& group, const VertexSet& body) const {
  int n = ps_.vertex_count();
  VertexSet out(n);
  if (group.empty()) {
    // universal modality: either every vertex satisfies the body or none do
    return body.all() ? VertexSet::full(n) : out;
  }
  // group vertices by their joint local-state signature; a class is in the
  // result iff all of its members satisfy the body
  std::map<std::vector<std::uint64_t>, std::pair<std::vector<VertexId>, bool>> classes;
  std::vector<std::uint64_t> sig(group.size());
  for (VertexId v = 0; v < n; ++v) {
    for (std::size_t i = 0; i < group.size(); ++i) sig[i] = ps_.local_state_id(v, group[i]);
    auto& entry = classes.try_emplace(sig, std::pair<std::vector<VertexId>, bool>{{}, true})
                      .first->second;
    entry.first.push_back(v);
    if (!body.test(v)) entry.second = false;
  }
  for (const auto& [key, entry] : classes) {
    if (!entry.second) continue;
    for (VertexId v : entry.first) out.set(v);
  }
  return out;
}

VertexSet common_closure(const ProductSystem& ps, const AgentGroup& group,
                         const VertexSet& seed) {
  if (group.empty()) throw std::invalid_argument("common_closure requires a nonempty group");
  int n = ps.vertex_count();

  // bucket vertices per group member by local-state value
  std::vector<std::map<std::uint64_t, std::vector<VertexId>>> buckets(group.size());
  for (VertexId v = 0; v < n; ++v)
    for (std::size_t i = 0; i < group.size(); ++i)
      buckets[i][ps.local_state_id(v, group[i])].push_back(v);

  VertexSet visited = seed;
  std::deque<VertexId> queue;
  for (int v : seed.members()) queue.push_back(v);
  std::vector<std::set<std::uint64_t>> flooded(group.size());
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    for (std::size_t i = 0; i < group.size(); ++i) {
      std::uint64_t cls = ps.local_state_id(v, group[i]);
      if (!flooded[i].insert(cls).second) continue;
      for (VertexId u : buckets[i][cls]) {
        if (visited.test(u)) continue;
        visited.set(u);
        queue.push_back(u);
      }
    }
  }
  return visited;
}

VertexSet Evaluator::sat_ck(const AgentGroup& group, const VertexSet& body) const {
  if (group.empty()) return body;  // the empty-group relation is the identity
  // a vertex satisfies C iff no body-violating vertex is reachable in the
  // union of the members' equivalences
  VertexSet bad = common_closure(ps_, group, body.complement());
  return bad.complement();
}

namespace {

// extended agents whose loc(w, var) atoms occur free in f
void free_loc_agents(Formula f, const std::string& var, AgentGroup& out) {
  switch (f.op()) {
    case Op::LocEq:
      if (f.text() == var) out.push_back(f.group()[0]);
      return;
    case Op::Exists:
      if (f.text() == var) return;  // shadowed
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < f.arity(); ++i) free_loc_agents(f.kid(i), var, out);
}

}  // namespace

// The body sees the bound vertex only through its loc atoms, so bindings with
// equal local states for those agents produce the same set. Iterating one
// representative per signature class covers all vertices exactly.
std::vector<VertexId> Evaluator::exists_representatives(Formula f) {
  AgentGroup observed;
  free_loc_agents(f.kid(0), f.text(), observed);
  std::sort(observed.begin(), observed.end());
  observed.erase(std::unique(observed.begin(), observed.end()), observed.end());

  std::map<std::vector<std::uint64_t>, VertexId> classes;
  std::vector<std::uint64_t> sig(observed.size());
  for (VertexId h = 0; h < ps_.vertex_count(); ++h) {
    for (std::size_t i = 0; i < observed.size(); ++i)
      sig[i] = ps_.local_state_id(h, observed[i]);
    classes.try_emplace(sig, h);  // keeps the least index per class
  }
  std::vector<VertexId> reps;
  reps.reserve(classes.size());
  for (const auto& [key, rep] : classes) reps.push_back(rep);
  std::sort(reps.begin(), reps.end());
  return reps;
}

VertexSet Evaluator::sat_exists(Formula f, const Context& ctx) {
  const std::string& var = f.text();
  VertexSet out(ps_.vertex_count());
  Context inner = ctx;
  for (VertexId h : exists_representatives(f)) {
    inner[var] = h;
    out |= evaluate(f.kid(0), inner);
    if (out.all()) break;  // cannot grow further
  }
  return out;
}

VertexSet Evaluator::evaluate(Formula f, const Context& ctx) {
  Key key;
  if (memoize_) {
    key.node = f.node();
    auto it = free_vars_.find(f.node());
    if (it == free_vars_.end())
      it = free_vars_.emplace(f.node(), free_variables(f)).first;
    for (const auto& var : it->second) {
      auto binding = ctx.find(var);
      if (binding == ctx.end())
        throw std::invalid_argument("unbound variable \"" + var + "\"");
      key.bindings.emplace_back(var, binding->second);
    }
    ++cache_lookups_;
    auto hit = cache_.find(key);
    if (hit != cache_.end()) {
      ++cache_hits_;
      return hit->second;
    }
  }

  int n = ps_.vertex_count();
  VertexSet out(n);
  switch (f.op()) {
    case Op::True:
      out = VertexSet::full(n);
      break;
    case Op::False:
      break;
    case Op::Prop:
      out = sat_prop(f.text());
      break;
    case Op::Not:
      out = evaluate(f.kid(0), ctx).complement();
      break;
    case Op::And:
      out = evaluate(f.kid(0), ctx);
      out &= evaluate(f.kid(1), ctx);
      break;
    case Op::Or:
      out = evaluate(f.kid(0), ctx);
      out |= evaluate(f.kid(1), ctx);
      break;
    case Op::Implies:
      out = evaluate(f.kid(0), ctx).complement();
      out |= evaluate(f.kid(1), ctx);
      break;
    case Op::EX:
      out = preimage(evaluate(f.kid(0), ctx));
      break;
    case Op::AX:
      out = preimage(evaluate(f.kid(0), ctx).complement()).complement();
      break;
    case Op::EU:
      out = sat_eu(f.kid(0), f.kid(1), ctx);
      break;
    case Op::AU:
      out = sat_au(f.kid(0), f.kid(1), ctx);
      break;
    case Op::Dk:
      out = sat_dk(f.group(), evaluate(f.kid(0), ctx));
      break;
    case Op::Ck:
      out = sat_ck(f.group(), evaluate(f.kid(0), ctx));
      break;
    case Op::Exists:
      out = sat_exists(f, ctx);
      break;
    case Op::LocEq: {
      auto binding = ctx.find(f.text());
      if (binding == ctx.end())
        throw std::invalid_argument("unbound variable \"" + f.text() + "\"");
      std::uint64_t target = ps_.local_state_id(binding->second, f.group()[0]);
      for (VertexId v = 0; v < n; ++v)
        if (ps_.local_state_id(v, f.group()[0]) == target) out.set(v);
      break;
    }
    default:
      throw std::invalid_argument("sat_set requires a core-expanded formula (found " +
                                  f.to_string() + ")");
  }

  if (memoize_) cache_.emplace(std::move(key), out);
  return out;
}

Verdict check(const ProductSystem& ps, const Context& ctx, Formula f, bool memoize) {
  std::vector<std::string> warnings;
  Formula core = expand_derived(f, &warnings);

  for (const auto& var : free_variables(core))
    if (!ctx.count(var))
      throw std::invalid_argument("unbound variable \"" + var +
                                  "\": the context must cover all free variables");

  auto start = std::chrono::steady_clock::now();
  Evaluator eval(ps, memoize);
  VertexSet sat = eval.sat(core, ctx);

  Verdict verdict;
  verdict.holds = true;
  for (VertexId v : ps.initial_vertices()) {
    if (!sat.test(v)) {
      verdict.holds = false;
      if (!verdict.counterexample || v < *verdict.counterexample) verdict.counterexample = v;
    }
  }

  if (verdict.holds) {
    // peel top-level existentials: report the least vertex that witnesses the
    // formula at every initial vertex, when a single such vertex exists
    Formula g = core;
    Context bound = ctx;
    while (g.op() == Op::Exists) {
      std::optional<VertexId> witness;
      for (VertexId h : eval.exists_representatives(g)) {
        Context candidate = bound;
        candidate[g.text()] = h;
        VertexSet body = eval.sat(g.kid(0), candidate);
        bool covers = true;
        for (VertexId v : ps.initial_vertices())
          if (!body.test(v)) {
            covers = false;
            break;
          }
        if (covers) {
          witness = h;
          break;
        }
      }
      if (!witness) break;
      verdict.witness_bindings.emplace_back(g.text(), *witness);
      bound[g.text()] = *witness;
      g = g.kid(0);
    }
  }

  auto end = std::chrono::steady_clock::now();
  verdict.stats.profile_count = ps.profile_count();
  verdict.stats.vertex_count = static_cast<std::size_t>(ps.vertex_count());
  verdict.stats.edge_count = ps.edge_count();
  verdict.stats.cache_entries = eval.cache_entries();
  verdict.stats.cache_lookups = eval.cache_lookups();
  verdict.stats.cache_hits = eval.cache_hits();
  verdict.stats.fixpoint_rounds_max = eval.fixpoint_rounds_max();
  verdict.stats.eval_seconds = std::chrono::duration<double>(end - start).count();
  return verdict;
}

Verdict check(const Environment& env, StrategyClass cls, const Context& ctx, Formula f,
              std::uint64_t vertex_cap) {
  ProductSystem ps = build_product(env, cls, vertex_cap);
  return check(ps, ctx, f);
}

}  // namespace esl
