#include "esl/oracle.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "esl/strategy.hpp"

namespace esl::oracle {

namespace {

// observation classes re-derived from the raw observation table
std::vector<int> obs_classes_of(const Environment& env, AgentId agent) {
  std::vector<int> out(env.state_count());
  std::map<std::string, int> first_seen;
  for (StateId s = 0; s < env.state_count(); ++s) {
    const auto& sym = env.observations[agent][s];
    if (!sym)
      throw std::invalid_argument("oracle requires total observations (agent " +
                                  env.agents[agent] + ", state " + env.states[s] + ")");
    auto it = first_seen.emplace(*sym, static_cast<int>(first_seen.size())).first;
    out[s] = it->second;
  }
  return out;
}

std::vector<std::set<ActionId>> masks_to_choice(const Environment& env, AgentId agent,
                                                const std::vector<int>& slot_of_state,
                                                const std::vector<std::uint32_t>& slot_masks) {
  std::vector<std::set<ActionId>> choice(env.state_count());
  for (StateId s = 0; s < env.state_count(); ++s) {
    std::uint32_t m = slot_masks[slot_of_state[s]];
    for (int a = 0; m != 0; ++a, m >>= 1)
      if (m & 1u) choice[s].insert(a);
  }
  return choice;
}

// all strategies of one agent in canonical order (slot 0 most significant,
// masks by increasing value), built recursively
std::vector<std::vector<std::set<ActionId>>> agent_strategies(const Environment& env,
                                                              AgentId agent,
                                                              StrategyClass cls) {
  bool uniform = cls == StrategyClass::Unif || cls == StrategyClass::UnifDet;
  bool deterministic = cls == StrategyClass::Det || cls == StrategyClass::UnifDet;

  std::vector<int> slot_of_state;
  int num_slots;
  if (uniform) {
    slot_of_state = obs_classes_of(env, agent);
    num_slots = slot_of_state.empty() ? 0 : *std::max_element(slot_of_state.begin(),
                                                              slot_of_state.end()) + 1;
  } else {
    slot_of_state.resize(env.state_count());
    for (StateId s = 0; s < env.state_count(); ++s) slot_of_state[s] = s;
    num_slots = env.state_count();
  }

  int num_actions = static_cast<int>(env.actions[agent].size());
  std::vector<std::uint32_t> domain;
  for (std::uint32_t m = 1; m < (1u << num_actions); ++m)
    if (!deterministic || (m & (m - 1)) == 0) domain.push_back(m);

  std::vector<std::vector<std::set<ActionId>>> out;
  std::vector<std::uint32_t> current(num_slots);
  std::function<void(int)> rec = [&](int slot) {
    if (slot == num_slots) {
      out.push_back(masks_to_choice(env, agent, slot_of_state, current));
      return;
    }
    for (std::uint32_t m : domain) {
      current[slot] = m;
      rec(slot + 1);
    }
  };
  rec(0);
  return out;
}

bool action_allowed(const OracleSystem& sys, const OraclePair& p,
                    const std::vector<ActionId>& action) {
  for (AgentId a = 0; a < static_cast<AgentId>(action.size()); ++a)
    if (!sys.strategy_of(a, p.strategy[a])[p.state].count(action[a])) return false;
  return true;
}

}  // namespace

OracleSystem::OracleSystem(const Environment& env, StrategyClass cls) : env_(env) {
  for (AgentId a = 0; a < env_.agent_count(); ++a)
    strategies_.push_back(agent_strategies(env_, a, cls));

  std::size_t profile_count = 1;
  for (const auto& per_agent : strategies_) {
    profile_count *= per_agent.size();
    if (profile_count * env_.state_count() > 50 * kPairGuard)
      throw std::length_error("oracle size guard exceeded while enumerating profiles");
  }

  // walk profiles in canonical order (agent 0 outermost); for each, collect
  // the states that occur in runs: the closure of the initial states under
  // transitions whose joint action is enabled by the profile
  std::vector<int> profile(env_.agent_count());
  std::function<void(AgentId)> rec = [&](AgentId agent) {
    if (agent == env_.agent_count()) {
      std::vector<bool> reach(env_.state_count(), false);
      std::vector<StateId> order;
      for (StateId s0 : env_.initial)
        if (!reach[s0]) {
          reach[s0] = true;
          order.push_back(s0);
        }
      bool changed = true;
      while (changed) {
        changed = false;
        for (const auto& t : env_.transitions) {
          if (!reach[t.from] || reach[t.to]) continue;
          bool allowed = true;
          for (AgentId a = 0; a < env_.agent_count(); ++a)
            if (!strategies_[a][profile[a]][t.from].count(t.action[a])) {
              allowed = false;
              break;
            }
          if (allowed) {
            reach[t.to] = true;
            order.push_back(t.to);
            changed = true;
          }
        }
      }
      for (StateId s : order) {
        if (pairs_.size() >= kPairGuard)
          throw std::length_error("oracle size guard exceeded (more than " +
                                  std::to_string(kPairGuard) + " global states)");
        pair_index_.emplace(std::make_pair(s, profile), pairs_.size());
        pairs_.push_back({s, profile});
      }
      return;
    }
    for (std::size_t k = 0; k < strategies_[agent].size(); ++k) {
      profile[agent] = static_cast<int>(k);
      rec(agent + 1);
    }
  };
  rec(0);

  // initial pairs in (profile, initial-state) order
  std::vector<int> current(env_.agent_count());
  std::function<void(AgentId)> init_rec = [&](AgentId agent) {
    if (agent == env_.agent_count()) {
      for (StateId s0 : env_.initial)
        initial_.push_back(pair_index_.at(std::make_pair(s0, current)));
      return;
    }
    for (std::size_t k = 0; k < strategies_[agent].size(); ++k) {
      current[agent] = static_cast<int>(k);
      init_rec(agent + 1);
    }
  };
  init_rec(0);
  std::sort(initial_.begin(), initial_.end());
  initial_.erase(std::unique(initial_.begin(), initial_.end()), initial_.end());
}

std::vector<std::size_t> OracleSystem::pair_successors(std::size_t i) const {
  const OraclePair& p = pairs_[i];
  std::vector<std::size_t> out;
  for (const auto& t : env_.transitions) {
    if (t.from != p.state) continue;
    if (!action_allowed(*this, p, t.action)) continue;
    std::size_t target = pair_index_.at(std::make_pair(t.to, p.strategy));
    if (std::find(out.begin(), out.end(), target) == out.end()) out.push_back(target);
  }
  return out;
}

bool OracleSystem::locals_eq(std::size_t g, std::size_t h, const ExtendedAgent& who) const {
  const OraclePair& a = pairs_[g];
  const OraclePair& b = pairs_[h];
  switch (who.kind) {
    case ExtendedAgent::Kind::Env:
      return a.state == b.state;
    case ExtendedAgent::Kind::Base: {
      auto id = env_.agent_id(who.name);
      if (!id) throw std::invalid_argument("unknown agent \"" + who.name + "\"");
      return env_.observations[*id][a.state] == env_.observations[*id][b.state];
    }
    case ExtendedAgent::Kind::Sigma: {
      auto id = env_.agent_id(who.name);
      if (!id) throw std::invalid_argument("unknown agent \"" + who.name + "\"");
      return strategies_[*id][a.strategy[*id]] == strategies_[*id][b.strategy[*id]];
    }
  }
  return false;
}

OracleSystem::Description OracleSystem::describe(std::size_t i) const {
  const OraclePair& p = pairs_[i];
  Description d;
  d.state = env_.states[p.state];
  for (AgentId a = 0; a < env_.agent_count(); ++a) {
    std::vector<std::set<std::string>> per_state;
    for (StateId s = 0; s < env_.state_count(); ++s) {
      std::set<std::string> names;
      for (ActionId act : strategies_[a][p.strategy[a]][s]) names.insert(env_.actions[a][act]);
      per_state.push_back(std::move(names));
    }
    d.choices.push_back(std::move(per_state));
  }
  return d;
}

// ---------------------------------------------------------------------------

bool eval(const OracleSystem& sys, std::size_t pair, Formula f, const OracleContext& ctx) {
  switch (f.op()) {
    case Op::True:
      return true;
    case Op::False:
      return false;
    case Op::Prop: {
      const Proposition* p = sys.env().find_proposition(f.text());
      if (!p) throw std::invalid_argument("undeclared proposition \"" + f.text() + "\"");
      return p->states[sys.pair(pair).state];
    }
    case Op::Not:
      return !eval(sys, pair, f.kid(0), ctx);
    case Op::And:
      return eval(sys, pair, f.kid(0), ctx) && eval(sys, pair, f.kid(1), ctx);
    case Op::Or:
      return eval(sys, pair, f.kid(0), ctx) || eval(sys, pair, f.kid(1), ctx);
    case Op::Implies:
      return !eval(sys, pair, f.kid(0), ctx) || eval(sys, pair, f.kid(1), ctx);
    case Op::AX: {
      for (std::size_t w : sys.pair_successors(pair))
        if (!eval(sys, w, f.kid(0), ctx)) return false;
      return true;
    }
    case Op::EX: {
      for (std::size_t w : sys.pair_successors(pair))
        if (eval(sys, w, f.kid(0), ctx)) return true;
      return false;
    }
    case Op::EU: {
      // search for a path satisfying kid0 until kid1
      std::vector<bool> visited(sys.pair_count(), false);
      std::vector<std::size_t> stack{pair};
      visited[pair] = true;
      while (!stack.empty()) {
        std::size_t u = stack.back();
        stack.pop_back();
        if (eval(sys, u, f.kid(1), ctx)) return true;
        if (!eval(sys, u, f.kid(0), ctx)) continue;
        for (std::size_t w : sys.pair_successors(u))
          if (!visited[w]) {
            visited[w] = true;
            stack.push_back(w);
          }
      }
      return false;
    }
    case Op::AU: {
      // false iff some path stays out of kid1 and either leaves kid0 or cycles
      enum { White, Grey, Black };
      std::vector<int> color(sys.pair_count(), White);
      std::function<bool(std::size_t)> bad = [&](std::size_t u) -> bool {
        if (eval(sys, u, f.kid(1), ctx)) return false;
        if (!eval(sys, u, f.kid(0), ctx)) return true;
        color[u] = Grey;
        for (std::size_t w : sys.pair_successors(u)) {
          if (color[w] == Grey) return true;
          if (color[w] == White && bad(w)) return true;
        }
        color[u] = Black;
        return false;
      };
      return !bad(pair);
    }
    case Op::Dk: {
      for (std::size_t h = 0; h < sys.pair_count(); ++h) {
        bool related = true;
        for (const auto& w : f.group())
          if (!sys.locals_eq(pair, h, w)) {
            related = false;
            break;
          }
        if (related && !eval(sys, h, f.kid(0), ctx)) return false;
      }
      return true;
    }
    case Op::Ck: {
      if (f.group().empty()) return eval(sys, pair, f.kid(0), ctx);
      // forward closure of {pair} under the union of the relations
      std::vector<bool> in(sys.pair_count(), false);
      std::vector<std::size_t> work{pair};
      in[pair] = true;
      while (!work.empty()) {
        std::size_t u = work.back();
        work.pop_back();
        for (std::size_t k = 0; k < sys.pair_count(); ++k) {
          if (in[k]) continue;
          for (const auto& w : f.group())
            if (sys.locals_eq(u, k, w)) {
              in[k] = true;
              work.push_back(k);
              break;
            }
        }
      }
      for (std::size_t k = 0; k < sys.pair_count(); ++k)
        if (in[k] && !eval(sys, k, f.kid(0), ctx)) return false;
      return true;
    }
    case Op::Exists: {
      OracleContext inner = ctx;
      for (std::size_t h = 0; h < sys.pair_count(); ++h) {
        inner[f.text()] = h;
        if (eval(sys, pair, f.kid(0), inner)) return true;
      }
      return false;
    }
    case Op::LocEq: {
      auto it = ctx.find(f.text());
      if (it == ctx.end())
        throw std::invalid_argument("unbound variable \"" + f.text() + "\"");
      return sys.locals_eq(pair, it->second, f.group()[0]);
    }
    default:
      throw std::invalid_argument("oracle eval requires a core-expanded formula");
  }
}

NaiveVerdict naive_check(const OracleSystem& sys, const OracleContext& ctx, Formula f) {
  Formula core = expand_derived(f);
  NaiveVerdict out;
  out.holds = true;
  for (std::size_t i : sys.initial_pairs()) {
    if (!eval(sys, i, core, ctx)) {
      out.holds = false;
      out.counterexample = i;
      break;
    }
  }
  return out;
}

NaiveVerdict naive_check(const Environment& env, StrategyClass cls, const OracleContext& ctx,
                         Formula f) {
  OracleSystem sys(env, cls);
  return naive_check(sys, ctx, f);
}

// ---------------------------------------------------------------------------

VertexSet gfp_relativized_ck(const ProductSystem& ps, const std::vector<std::string>& group_g,
                             const std::vector<std::string>& group_h, Formula f,
                             const Context& ctx) {
  if (group_g.empty())
    throw std::invalid_argument("gfp_relativized_ck requires a nonempty group G");

  Evaluator eval(ps);
  VertexSet sat_f = eval.sat(expand_derived(f), ctx);

  std::vector<ExtendedAgent> bases;
  for (const auto& name : group_g) bases.push_back(ExtendedAgent::base(name));
  std::vector<ExtendedAgent> sigmas;
  for (const auto& name : group_h) sigmas.push_back(ExtendedAgent::sigma(name));

  int n = ps.vertex_count();
  VertexSet x = VertexSet::full(n);
  for (;;) {
    VertexSet next(n);
    for (VertexId g = 0; g < n; ++g) {
      bool ok = true;
      for (VertexId h = 0; h < n && ok; ++h) {
        for (const auto& base : bases) {
          bool related = ps.locals_equal(g, h, base);
          for (const auto& sigma : sigmas) {
            if (!related) break;
            related = ps.locals_equal(g, h, sigma);
          }
          if (related && !(x.test(h) && sat_f.test(h))) {
            ok = false;
            break;
          }
        }
      }
      if (ok) next.set(g);
    }
    if (next == x) break;
    x = next;
  }
  return x;
}

// ---------------------------------------------------------------------------

namespace {

std::uint64_t pick(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  return lo + rng() % (hi - lo + 1);
}

}  // namespace

Environment random_environment(const GenBounds& bounds) {
  std::mt19937_64 rng(bounds.seed);
  Environment env;

  int n_states = static_cast<int>(pick(rng, 1, bounds.max_states));
  int n_agents = static_cast<int>(pick(rng, 1, bounds.max_agents));
  for (int s = 0; s < n_states; ++s) env.states.push_back("s" + std::to_string(s));
  for (int a = 0; a < n_agents; ++a) env.agents.push_back(std::string(1, 'a' + a));

  env.actions.resize(n_agents);
  for (int a = 0; a < n_agents; ++a) {
    int n_act = static_cast<int>(pick(rng, 1, bounds.max_actions_per_agent));
    for (int m = 0; m < n_act; ++m) env.actions[a].push_back("m" + std::to_string(m));
  }

  // observation alphabets biased small so that uniformity bites
  env.observations.assign(n_agents, std::vector<std::optional<std::string>>(n_states));
  for (int a = 0; a < n_agents; ++a) {
    int cap = std::min(bounds.max_obs_classes, n_states);
    int classes = 1;
    std::uint64_t roll = pick(rng, 0, 99);
    if (roll >= 45 && cap >= 2) classes = 2;
    if (roll >= 85 && cap >= 3) classes = 3;
    for (int s = 0; s < n_states; ++s) {
      int c = s < classes ? s : static_cast<int>(pick(rng, 0, classes - 1));
      env.observations[a][s] = "o" + std::to_string(c);
    }
  }

  int n_props = static_cast<int>(pick(rng, 1, bounds.max_props));
  static const char* prop_names[] = {"p", "q", "r", "v", "w"};
  for (int i = 0; i < n_props && i < 5; ++i) {
    Proposition prop;
    prop.name = prop_names[i];
    prop.states.resize(n_states);
    for (int s = 0; s < n_states; ++s) prop.states[s] = pick(rng, 0, 1) == 1;
    env.propositions.push_back(std::move(prop));
  }

  // serial by construction: at least one successor per (state, joint action)
  std::vector<ActionId> action(n_agents, 0);
  std::function<void(int, StateId)> emit = [&](int agent, StateId s) {
    if (agent == n_agents) {
      int fan = pick(rng, 0, 99) < 75 ? 1 : 2;
      std::set<StateId> targets;
      while (static_cast<int>(targets.size()) < std::min(fan, n_states))
        targets.insert(static_cast<StateId>(pick(rng, 0, n_states - 1)));
      for (StateId t : targets) env.transitions.push_back({s, action, t});
      return;
    }
    for (ActionId m = 0; m < static_cast<ActionId>(env.actions[agent].size()); ++m) {
      action[agent] = m;
      emit(agent + 1, s);
    }
  };
  for (StateId s = 0; s < n_states; ++s) emit(0, s);

  if (pick(rng, 0, 99) < 60) {
    env.initial.push_back(static_cast<StateId>(pick(rng, 0, n_states - 1)));
  } else {
    for (StateId s = 0; s < n_states; ++s)
      if (pick(rng, 0, 1) == 1) env.initial.push_back(s);
    if (env.initial.empty()) env.initial.push_back(0);
  }

  return env;
}

namespace {

struct FormulaGen {
  std::mt19937_64& rng;
  const Environment& env;
  const FormulaBounds& bounds;
  int quantifiers_left;
  std::vector<std::string> bound_vars;
  int next_var = 0;

  ExtendedAgent random_agent() {
    std::uint64_t roll = pick(rng, 0, 99);
    const std::string& name = env.agents[pick(rng, 0, env.agents.size() - 1)];
    if (roll < 50) return ExtendedAgent::base(name);
    if (roll < 85) return ExtendedAgent::sigma(name);
    return ExtendedAgent::environment();
  }

  AgentGroup random_group(bool allow_empty) {
    if (allow_empty && pick(rng, 0, 99) < 12) return {};
    AgentGroup g{random_agent()};
    if (pick(rng, 0, 99) < 35) g.push_back(random_agent());
    return g;
  }

  Formula leaf() {
    std::uint64_t roll = pick(rng, 0, 99);
    bool can_loc = !bound_vars.empty() || !bounds.closed;
    if (roll < 25 && can_loc) {
      std::string var =
          bound_vars.empty() ? "x0" : bound_vars[pick(rng, 0, bound_vars.size() - 1)];
      return Formula::loc(random_agent(), var);
    }
    if (roll < 40 || env.propositions.empty())
      return pick(rng, 0, 1) == 1 ? Formula::tt() : Formula::ff();
    return Formula::prop(env.propositions[pick(rng, 0, env.propositions.size() - 1)].name);
  }

  Formula gen(int depth) {
    if (depth <= 0) return leaf();
    std::uint64_t roll = pick(rng, 0, 99);
    if (roll < 8) return leaf();
    if (roll < 20) return Formula::lnot(gen(depth - 1));
    if (roll < 32) return Formula::land(gen(depth - 1), gen(depth - 1));
    if (roll < 42) return Formula::lor(gen(depth - 1), gen(depth - 1));
    if (roll < 48) return Formula::implies(gen(depth - 1), gen(depth - 1));
    if (roll < 53) return Formula::ax(gen(depth - 1));
    if (roll < 58) return Formula::ex(gen(depth - 1));
    if (roll < 61) return Formula::af(gen(depth - 1));
    if (roll < 64) return Formula::ef(gen(depth - 1));
    if (roll < 67) return Formula::ag(gen(depth - 1));
    if (roll < 70) return Formula::eg(gen(depth - 1));
    if (roll < 73) return Formula::au(gen(depth - 1), gen(depth - 1));
    if (roll < 76) return Formula::eu(gen(depth - 1), gen(depth - 1));
    if (roll < 84) return Formula::knows(random_agent(), gen(depth - 1));
    if (roll < 89) return Formula::dk(random_group(true), gen(depth - 1));
    if (roll < 93) return Formula::ck(random_group(false), gen(depth - 1));
    if (roll < 95) return Formula::ek(random_group(false), gen(depth - 1));
    if (quantifiers_left > 0) {
      --quantifiers_left;
      std::string var = "x" + std::to_string(next_var++);
      bound_vars.push_back(var);
      Formula body = gen(depth - 1);
      bound_vars.pop_back();
      return pick(rng, 0, 99) < 80 ? Formula::exists(var, body) : Formula::forall(var, body);
    }
    return Formula::land(gen(depth - 1), gen(depth - 1));
  }
};

}  // namespace

Formula random_formula(std::mt19937_64& rng, const Environment& env,
                       const FormulaBounds& bounds) {
  FormulaGen gen{rng, env, bounds, bounds.quantifier_budget, {}, 0};
  Formula f = gen.gen(bounds.max_depth);
  if (bounds.closed) {
    // closed mode must return a sentence
    for (const auto& var : free_variables(f)) f = Formula::exists(var, f);
  }
  return f;
}

// ---------------------------------------------------------------------------

namespace {

OracleSystem::Description describe_vertex(const ProductSystem& ps, VertexId v) {
  OracleSystem::Description d;
  const Environment& env = ps.env();
  d.state = env.states[ps.vertex(v).env_state];
  StrategyProfile profile = ps.profile_of(v);
  for (AgentId a = 0; a < env.agent_count(); ++a) {
    std::vector<std::set<std::string>> per_state;
    for (StateId s = 0; s < env.state_count(); ++s) {
      std::set<std::string> names;
      for (ActionId act : profile.strategies[a].choice(s)) names.insert(env.actions[a][act]);
      per_state.push_back(std::move(names));
    }
    d.choices.push_back(std::move(per_state));
  }
  return d;
}

}  // namespace

DiffResult run_differential(const DiffOptions& options, std::ostream* log) {
  DiffResult result;
  static const StrategyClass cycle[] = {StrategyClass::UnifDet, StrategyClass::Det,
                                        StrategyClass::Unif, StrategyClass::All};
  std::uint64_t seed = options.seed;

  for (int i = 0; i < options.cases; ++i) {
    StrategyClass cls = options.only_class ? *options.only_class : cycle[i % 4];

    Environment env;
    bool fits = false;
    for (int attempt = 0; attempt < 500 && !fits; ++attempt) {
      GenBounds b = options.bounds;
      if (attempt >= 50) {
        b.max_states = std::min(b.max_states, 2);
        b.max_agents = 1;
      }
      b.seed = seed++;
      env = random_environment(b);
      try {
        std::uint64_t profiles = count_profiles(env, cls);
        fits = profiles * static_cast<std::uint64_t>(env.state_count()) <= options.max_pairs;
      } catch (const std::overflow_error&) {
        fits = false;
      }
    }
    if (!fits) continue;

    std::mt19937_64 frng(seed++ ^ 0x9e3779b97f4a7c15ULL);
    Formula f = random_formula(frng, env, options.formula);

    OracleSystem sys(env, cls);
    NaiveVerdict naive = naive_check(sys, {}, f);

    ProductSystem ps = build_product(env, cls);
    Verdict verdict = check(ps, {}, f);

    bool match = naive.holds == verdict.holds;
    std::string detail;
    if (!match) {
      detail = "holds mismatch: checker=" + std::to_string(verdict.holds) +
               " oracle=" + std::to_string(naive.holds);
    } else if (!verdict.holds) {
      OracleSystem::Description a = describe_vertex(ps, *verdict.counterexample);
      OracleSystem::Description b = sys.describe(*naive.counterexample);
      if (!(a == b)) {
        match = false;
        detail = "counterexample mismatch: checker=(" + a.state + ", ...) oracle=(" + b.state +
                 ", ...)";
      }
    }

    ++result.cases_run;
    if (!match) {
      ++result.mismatches;
      if (result.failing_env.empty()) {
        result.failing_env = serialize_environment(env);
        result.failing_formula = f.to_string();
        result.failing_class = strategy_class_name(cls);
        result.detail = detail;
      }
      if (log)
        *log << "MISMATCH class=" << strategy_class_name(cls) << " formula=" << f.to_string()
             << "\n  " << detail << "\n";
    }
  }
  return result;
}

}  // namespace esl::oracle
