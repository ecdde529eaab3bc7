#include "esl/product.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace esl {

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<StateId, ProfileIndex>& p) const {
    return std::hash<std::uint64_t>{}(static_cast<std::uint64_t>(p.first) * 0x9e3779b97f4a7c15ULL ^
                                      p.second);
  }
};

}  // namespace

ProductSystem::ProductSystem(Environment env, StrategyClass cls, std::uint64_t vertex_cap)
    : env_(std::move(env)), cls_(cls), space_(env_, cls) {
  TransitionIndex transition_index(env_);
  for (AgentId a = 0; a < env_.agent_count(); ++a)
    obs_ids_.push_back(observation_class_ids(env_, a));

  std::uint64_t profiles = space_.profile_count();
  std::uint64_t seeds = profiles * static_cast<std::uint64_t>(env_.initial.size());
  if (seeds > vertex_cap || profiles > vertex_cap)
    throw resource_limit_error(
        "product exceeds the vertex cap: " + std::to_string(profiles) + " profiles x " +
            std::to_string(env_.initial.size()) + " initial states > " +
            std::to_string(vertex_cap),
        profiles);

  std::unordered_map<std::pair<StateId, ProfileIndex>, VertexId, PairHash> index;
  std::deque<VertexId> queue;

  auto discover = [&](StateId s, ProfileIndex p, VertexId parent,
                      const std::vector<ActionId>& action) -> VertexId {
    auto key = std::make_pair(s, p);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    if (vertices_.size() >= vertex_cap)
      throw resource_limit_error("product exceeds the vertex cap of " +
                                     std::to_string(vertex_cap) + " vertices (" +
                                     std::to_string(profiles) + " profiles attempted)",
                                 profiles);
    VertexId v = static_cast<VertexId>(vertices_.size());
    vertices_.push_back({s, p});
    discovery_.push_back({parent, action});
    index.emplace(key, v);
    queue.push_back(v);
    return v;
  };

  for (ProfileIndex p = 0; p < profiles; ++p)
    for (StateId s0 : env_.initial) {
      std::size_t before = vertices_.size();
      VertexId v = discover(s0, p, -1, {});
      if (vertices_.size() > before) initial_.push_back(v);  // skip duplicate seeds
    }

  succ_.reserve(256);
  int agents = env_.agent_count();
  std::vector<std::vector<ActionId>> enabled(agents);
  while (!queue.empty()) {
    VertexId v = queue.front();
    queue.pop_front();
    StateId s = vertices_[v].env_state;
    ProfileIndex p = vertices_[v].profile;

    for (AgentId a = 0; a < agents; ++a) {
      enabled[a].clear();
      std::uint32_t mask = space_.mask_for(p, a, s);
      for (int i = 0; mask != 0; ++i, mask >>= 1)
        if (mask & 1u) enabled[a].push_back(i);
    }

    // walk the cartesian product of enabled action sets
    std::vector<std::size_t> pick(agents, 0);
    std::vector<ActionId> action(agents);
    std::vector<VertexId> out;
    for (;;) {
      for (AgentId a = 0; a < agents; ++a) action[a] = enabled[a][pick[a]];
      std::uint64_t ja = env_.joint_action_index(action);
      for (StateId t : transition_index.successors(s, ja)) {
        VertexId w = discover(t, p, v, action);
        out.push_back(w);
      }
      int a = agents - 1;
      while (a >= 0 && ++pick[a] == enabled[a].size()) pick[a--] = 0;
      if (a < 0) break;
    }

    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    if (succ_.size() <= static_cast<std::size_t>(v)) succ_.resize(v + 1);
    succ_[v] = std::move(out);
  }
  succ_.resize(vertices_.size());

  pred_.assign(vertices_.size(), {});
  for (VertexId v = 0; v < vertex_count(); ++v) {
    edge_count_ += succ_[v].size();
    for (VertexId w : succ_[v]) pred_[w].push_back(v);
  }
}

AgentId ProductSystem::resolve_agent(const ExtendedAgent& who) const {
  auto id = env_.agent_id(who.name);
  if (!id) throw std::invalid_argument("unknown agent \"" + who.name + "\"");
  return *id;
}

std::uint64_t ProductSystem::local_state_id(VertexId v, const ExtendedAgent& who) const {
  switch (who.kind) {
    case ExtendedAgent::Kind::Base:
      return static_cast<std::uint64_t>(obs_ids_[resolve_agent(who)][vertex(v).env_state]);
    case ExtendedAgent::Kind::Sigma:
      return space_.agent_strategy_index(vertex(v).profile, resolve_agent(who));
    case ExtendedAgent::Kind::Env:
      return static_cast<std::uint64_t>(vertex(v).env_state);
  }
  return 0;
}

bool ProductSystem::locals_equal(VertexId g, VertexId h, const ExtendedAgent& who) const {
  return local_state_id(g, who) == local_state_id(h, who);
}

std::string ProductSystem::describe_profile(ProfileIndex p) const {
  std::ostringstream out;
  for (AgentId a = 0; a < env_.agent_count(); ++a) {
    if (a) out << ", ";
    out << env_.agents[a] << ":";
    Strategy strat = space_.agent(a).strategy(space_.agent_strategy_index(p, a));
    // constant singleton strategies print as the bare action name
    bool constant = true;
    for (std::uint32_t m : strat.choice_masks)
      if (m != strat.choice_masks[0]) constant = false;
    auto mask_names = [&](std::uint32_t mask) {
      std::string s;
      for (int i = 0; mask != 0; ++i, mask >>= 1)
        if (mask & 1u) {
          if (!s.empty()) s += "|";
          s += env_.actions[a][i];
        }
      return s;
    };
    if (constant && !strat.choice_masks.empty()) {
      out << mask_names(strat.choice_masks[0]);
    } else {
      out << "{";
      for (StateId s = 0; s < env_.state_count(); ++s) {
        if (s) out << ",";
        out << env_.states[s] << ":" << mask_names(strat.choice_masks[s]);
      }
      out << "}";
    }
  }
  return out.str();
}

std::string ProductSystem::describe(VertexId v) const {
  return "(" + env_.states[vertex(v).env_state] + ", " + describe_profile(vertex(v).profile) +
         ")";
}

std::string ProductSystem::dump_json(int indent) const {
  using ordered_json = nlohmann::ordered_json;
  ordered_json j;
  j["class"] = strategy_class_name(cls_);
  ordered_json verts = ordered_json::array();
  for (VertexId v = 0; v < vertex_count(); ++v) {
    ordered_json jv;
    jv["index"] = v;
    jv["state"] = env_.states[vertex(v).env_state];
    ordered_json prof = ordered_json::object();
    for (AgentId a = 0; a < env_.agent_count(); ++a) {
      Strategy strat = space_.agent(a).strategy(space_.agent_strategy_index(vertex(v).profile, a));
      ordered_json m = ordered_json::object();
      auto actions_of = [&](std::uint32_t mask) {
        ordered_json lst = ordered_json::array();
        for (int i = 0; mask != 0; ++i, mask >>= 1)
          if (mask & 1u) lst.push_back(env_.actions[a][i]);
        return lst;
      };
      // Uniform strategies are keyed by observation symbol; non-uniform ones
      // fall back to state keys (class keys would be ambiguous).
      if (strat.is_uniform(env_)) {
        std::set<std::string> done;
        for (StateId s = 0; s < env_.state_count(); ++s) {
          const std::string& sym = *env_.observations[a][s];
          if (done.insert(sym).second) m[sym] = actions_of(strat.choice_masks[s]);
        }
      } else {
        for (StateId s = 0; s < env_.state_count(); ++s)
          m[env_.states[s]] = actions_of(strat.choice_masks[s]);
      }
      prof[env_.agents[a]] = m;
    }
    jv["profile"] = prof;
    verts.push_back(jv);
  }
  j["vertices"] = verts;
  ordered_json edges = ordered_json::array();
  for (VertexId v = 0; v < vertex_count(); ++v)
    for (VertexId w : succ_[v]) edges.push_back(ordered_json::array({v, w}));
  j["edges"] = edges;
  j["initial"] = initial_;
  return j.dump(indent) + "\n";
}

ProductSystem build_product(const Environment& env, StrategyClass cls,
                            std::uint64_t vertex_cap) {
  ValidationReport report = validate_environment(env);
  if (!report.ok()) {
    std::string msg = "environment is invalid:";
    for (const auto& v : report.violations) msg += "\n  [" + v.rule + "] " + v.detail;
    throw std::invalid_argument(msg);
  }
  return ProductSystem(env, cls, vertex_cap);
}

}  // namespace esl
