#include "esl/environment.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "json.hpp"

namespace esl {

namespace {

using ordered_json = nlohmann::ordered_json;

bool is_identifier(const std::string& s) {
  if (s.empty() || !std::isalpha(static_cast<unsigned char>(s[0]))) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  });
}

[[noreturn]] void syntax_fail(const std::string& msg) {
  throw load_error(load_error::Kind::Syntax, "syntax error: " + msg);
}

[[noreturn]] void reference_fail(const std::string& msg) {
  throw load_error(load_error::Kind::Reference, "reference error: " + msg);
}

[[noreturn]] void duplicate_fail(const std::string& msg) {
  throw load_error(load_error::Kind::Duplicate, "duplicate-name error: " + msg);
}

void expect_keys(const ordered_json& obj, const std::set<std::string>& allowed,
                 const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key()))
      syntax_fail("unknown key \"" + it.key() + "\" in " + where);
  }
  for (const auto& key : allowed) {
    if (!obj.contains(key)) syntax_fail("missing key \"" + key + "\" in " + where);
  }
}

std::vector<std::string> string_list(const ordered_json& j, const std::string& where) {
  if (!j.is_array()) syntax_fail(where + " must be a list of strings");
  std::vector<std::string> out;
  for (const auto& item : j) {
    if (!item.is_string()) syntax_fail(where + " must contain only strings");
    out.push_back(item.get<std::string>());
  }
  return out;
}

}  // namespace

std::optional<AgentId> Environment::agent_id(const std::string& name) const {
  for (int i = 0; i < agent_count(); ++i)
    if (agents[i] == name) return i;
  return std::nullopt;
}

std::optional<StateId> Environment::state_id(const std::string& name) const {
  for (int i = 0; i < state_count(); ++i)
    if (states[i] == name) return i;
  return std::nullopt;
}

const Proposition* Environment::find_proposition(const std::string& name) const {
  for (const auto& p : propositions)
    if (p.name == name) return &p;
  return nullptr;
}

std::uint64_t Environment::joint_action_count() const {
  std::uint64_t n = 1;
  for (const auto& acts : actions) {
    std::uint64_t k = acts.size();
    if (k != 0 && n > std::numeric_limits<std::uint64_t>::max() / k)
      throw std::overflow_error("joint action count overflows 64 bits");
    n *= k;
  }
  return n;
}

std::uint64_t Environment::joint_action_index(const std::vector<ActionId>& action) const {
  std::uint64_t idx = 0;
  for (int i = 0; i < agent_count(); ++i) {
    idx = idx * actions[i].size() + static_cast<std::uint64_t>(action[i]);
  }
  return idx;
}

std::vector<ActionId> Environment::joint_action_from_index(std::uint64_t index) const {
  std::vector<ActionId> action(agents.size());
  for (int a = agent_count() - 1; a >= 0; --a) {
    action[a] = static_cast<ActionId>(index % actions[a].size());
    index /= actions[a].size();
  }
  return action;
}

TransitionIndex::TransitionIndex(const Environment& env) {
  std::uint64_t ja = env.joint_action_count();
  table.assign(env.states.size(), std::vector<std::vector<StateId>>(ja));
  for (const auto& t : env.transitions) {
    auto& lst = table[t.from][env.joint_action_index(t.action)];
    if (std::find(lst.begin(), lst.end(), t.to) == lst.end()) lst.push_back(t.to);
  }
}

bool Environment::operator==(const Environment& other) const {
  auto props_equal = [&] {
    if (propositions.size() != other.propositions.size()) return false;
    for (std::size_t i = 0; i < propositions.size(); ++i)
      if (propositions[i].name != other.propositions[i].name ||
          propositions[i].states != other.propositions[i].states)
        return false;
    return true;
  };
  auto trans_equal = [&] {
    if (transitions.size() != other.transitions.size()) return false;
    for (std::size_t i = 0; i < transitions.size(); ++i)
      if (transitions[i].from != other.transitions[i].from ||
          transitions[i].action != other.transitions[i].action ||
          transitions[i].to != other.transitions[i].to)
        return false;
    return true;
  };
  return agents == other.agents && states == other.states && initial == other.initial &&
         actions == other.actions && observations == other.observations && props_equal() &&
         trans_equal();
}

Environment load_environment(const std::string& text, bool complete_self_loops) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    syntax_fail(e.what());
  }
  if (!j.is_object()) syntax_fail("top level must be a JSON object");
  expect_keys(j,
              {"agents", "states", "initial", "actions", "observations", "propositions",
               "transitions"},
              "environment");

  Environment env;
  env.agents = string_list(j["agents"], "\"agents\"");
  env.states = string_list(j["states"], "\"states\"");

  auto check_names = [](const std::vector<std::string>& names, const std::string& what) {
    std::set<std::string> seen;
    for (const auto& n : names) {
      if (!is_identifier(n))
        syntax_fail(what + " name \"" + n + "\" is not an identifier");
      if (!seen.insert(n).second) duplicate_fail("duplicate " + what + " \"" + n + "\"");
    }
  };
  check_names(env.agents, "agent");
  check_names(env.states, "state");
  for (const auto& a : env.agents)
    if (a == "env")
      reference_fail("agent name \"env\" is reserved for the environment agent");

  for (const auto& name : string_list(j["initial"], "\"initial\"")) {
    auto sid = env.state_id(name);
    if (!sid) reference_fail("initial state \"" + name + "\" is not a declared state");
    env.initial.push_back(*sid);
  }
  if (env.initial.empty()) syntax_fail("initial must be nonempty");

  // actions: object agent -> list of strings
  const auto& jact = j["actions"];
  if (!jact.is_object()) syntax_fail("\"actions\" must be an object");
  for (auto it = jact.begin(); it != jact.end(); ++it)
    if (!env.agent_id(it.key()))
      reference_fail("actions given for unknown agent \"" + it.key() + "\"");
  env.actions.resize(env.agents.size());
  for (int a = 0; a < env.agent_count(); ++a) {
    if (!jact.contains(env.agents[a]))
      syntax_fail("missing action list for agent \"" + env.agents[a] + "\"");
    env.actions[a] = string_list(jact[env.agents[a]], "actions of \"" + env.agents[a] + "\"");
    std::set<std::string> seen;
    for (const auto& act : env.actions[a]) {
      if (act.empty()) syntax_fail("empty action name for agent \"" + env.agents[a] + "\"");
      if (!seen.insert(act).second)
        duplicate_fail("duplicate action \"" + act + "\" for agent \"" + env.agents[a] + "\"");
    }
  }

  // observations: object agent -> (object state -> string)
  const auto& jobs = j["observations"];
  if (!jobs.is_object()) syntax_fail("\"observations\" must be an object");
  for (auto it = jobs.begin(); it != jobs.end(); ++it)
    if (!env.agent_id(it.key()))
      reference_fail("observations given for unknown agent \"" + it.key() + "\"");
  env.observations.assign(env.agents.size(),
                          std::vector<std::optional<std::string>>(env.states.size()));
  for (int a = 0; a < env.agent_count(); ++a) {
    if (!jobs.contains(env.agents[a])) continue;  // totality is a validation concern
    const auto& m = jobs[env.agents[a]];
    if (!m.is_object())
      syntax_fail("observations of \"" + env.agents[a] + "\" must be an object");
    for (auto it = m.begin(); it != m.end(); ++it) {
      auto sid = env.state_id(it.key());
      if (!sid)
        reference_fail("observation of \"" + env.agents[a] + "\" names unknown state \"" +
                       it.key() + "\"");
      if (!it.value().is_string())
        syntax_fail("observation symbols must be strings");
      env.observations[a][*sid] = it.value().get<std::string>();
    }
  }

  // propositions: object prop -> list of states
  const auto& jprop = j["propositions"];
  if (!jprop.is_object()) syntax_fail("\"propositions\" must be an object");
  std::set<std::string> prop_seen;
  for (auto it = jprop.begin(); it != jprop.end(); ++it) {
    if (!is_identifier(it.key()))
      syntax_fail("proposition name \"" + it.key() + "\" is not an identifier");
    if (!prop_seen.insert(it.key()).second)
      duplicate_fail("duplicate proposition \"" + it.key() + "\"");
    Proposition p;
    p.name = it.key();
    p.states.assign(env.states.size(), false);
    for (const auto& name : string_list(it.value(), "proposition \"" + it.key() + "\"")) {
      auto sid = env.state_id(name);
      if (!sid)
        reference_fail("proposition \"" + it.key() + "\" names unknown state \"" + name + "\"");
      p.states[*sid] = true;
    }
    env.propositions.push_back(std::move(p));
  }

  // transitions: list of {"from", "action", "to"}
  const auto& jtr = j["transitions"];
  if (!jtr.is_array()) syntax_fail("\"transitions\" must be a list");
  for (const auto& t : jtr) {
    if (!t.is_object()) syntax_fail("each transition must be an object");
    expect_keys(t, {"from", "action", "to"}, "transition");
    if (!t["from"].is_string() || !t["to"].is_string())
      syntax_fail("transition endpoints must be state names");
    auto from = env.state_id(t["from"].get<std::string>());
    if (!from)
      reference_fail("transition from unknown state \"" + t["from"].get<std::string>() + "\"");
    auto to = env.state_id(t["to"].get<std::string>());
    if (!to)
      reference_fail("transition to unknown state \"" + t["to"].get<std::string>() + "\"");
    const auto& ja = t["action"];
    if (!ja.is_object()) syntax_fail("transition \"action\" must be an object");
    for (auto it = ja.begin(); it != ja.end(); ++it)
      if (!env.agent_id(it.key()))
        reference_fail("transition action names unknown agent \"" + it.key() + "\"");
    std::vector<ActionId> action(env.agents.size());
    for (int a = 0; a < env.agent_count(); ++a) {
      if (!ja.contains(env.agents[a]))
        syntax_fail("transition action missing agent \"" + env.agents[a] + "\"");
      if (!ja[env.agents[a]].is_string()) syntax_fail("action values must be strings");
      std::string act = ja[env.agents[a]].get<std::string>();
      auto pos = std::find(env.actions[a].begin(), env.actions[a].end(), act);
      if (pos == env.actions[a].end())
        reference_fail("transition names unknown action \"" + act + "\" for agent \"" +
                       env.agents[a] + "\"");
      action[a] = static_cast<ActionId>(pos - env.actions[a].begin());
    }
    env.transitions.push_back({*from, std::move(action), *to});
  }

  if (complete_self_loops) {
    std::uint64_t ja_count = env.joint_action_count();
    std::vector<std::vector<bool>> covered(env.states.size(),
                                           std::vector<bool>(ja_count, false));
    for (const auto& t : env.transitions)
      covered[t.from][env.joint_action_index(t.action)] = true;
    for (int s = 0; s < env.state_count(); ++s)
      for (std::uint64_t idx = 0; idx < ja_count; ++idx)
        if (!covered[s][idx])
          env.transitions.push_back({s, env.joint_action_from_index(idx), s});
  }

  return env;
}

std::string serialize_environment(const Environment& env, int indent) {
  ordered_json j;
  j["agents"] = env.agents;
  j["states"] = env.states;
  ordered_json initial = ordered_json::array();
  for (StateId s : env.initial) initial.push_back(env.states[s]);
  j["initial"] = initial;
  ordered_json actions = ordered_json::object();
  for (int a = 0; a < env.agent_count(); ++a) actions[env.agents[a]] = env.actions[a];
  j["actions"] = actions;
  ordered_json observations = ordered_json::object();
  for (int a = 0; a < env.agent_count(); ++a) {
    ordered_json m = ordered_json::object();
    for (int s = 0; s < env.state_count(); ++s)
      if (env.observations[a][s]) m[env.states[s]] = *env.observations[a][s];
    observations[env.agents[a]] = m;
  }
  j["observations"] = observations;
  ordered_json props = ordered_json::object();
  for (const auto& p : env.propositions) {
    ordered_json lst = ordered_json::array();
    for (int s = 0; s < env.state_count(); ++s)
      if (p.states[s]) lst.push_back(env.states[s]);
    props[p.name] = lst;
  }
  j["propositions"] = props;
  ordered_json trs = ordered_json::array();
  for (const auto& t : env.transitions) {
    ordered_json tr = ordered_json::object();
    tr["from"] = env.states[t.from];
    ordered_json action = ordered_json::object();
    for (int a = 0; a < env.agent_count(); ++a)
      action[env.agents[a]] = env.actions[a][t.action[a]];
    tr["action"] = action;
    tr["to"] = env.states[t.to];
    trs.push_back(tr);
  }
  j["transitions"] = trs;
  return j.dump(indent) + "\n";
}

ValidationReport validate_environment(const Environment& env) {
  ValidationReport report;

  if (env.initial.empty())
    report.add("initial-nonempty", "initial must be nonempty", "");
  for (StateId s : env.initial)
    if (s < 0 || s >= env.state_count())
      report.add("initial-subset", "initial state index out of range", std::to_string(s));

  for (int a = 0; a < env.agent_count(); ++a)
    if (env.actions[a].empty())
      report.add("actions-nonempty", "agent has an empty action set", env.agents[a]);

  for (int a = 0; a < env.agent_count(); ++a) {
    for (int s = 0; s < env.state_count(); ++s) {
      if (!env.observations[a][s])
        report.add("observation-totality",
                   "agent " + env.agents[a] + " has no observation for state " + env.states[s],
                   env.agents[a] + "/" + env.states[s]);
    }
  }

  bool transitions_ok = true;
  for (std::size_t i = 0; i < env.transitions.size(); ++i) {
    const auto& t = env.transitions[i];
    bool ok = t.from >= 0 && t.from < env.state_count() && t.to >= 0 &&
              t.to < env.state_count() &&
              t.action.size() == static_cast<std::size_t>(env.agent_count());
    for (int a = 0; ok && a < env.agent_count(); ++a)
      ok = t.action[a] >= 0 && t.action[a] < static_cast<ActionId>(env.actions[a].size());
    if (!ok) {
      report.add("transition-references", "transition has an out-of-range state or action",
                 "transition " + std::to_string(i));
      transitions_ok = false;
    }
  }

  // Seriality: every (state, joint action) pair must have a successor.
  bool actions_ok = transitions_ok &&
                    std::all_of(env.actions.begin(), env.actions.end(),
                                [](const auto& v) { return !v.empty(); });
  if (actions_ok) {
    std::uint64_t ja_count = env.joint_action_count();
    TransitionIndex index(env);
    for (int s = 0; s < env.state_count(); ++s) {
      for (std::uint64_t idx = 0; idx < ja_count; ++idx) {
        if (!index.successors(s, idx).empty()) continue;
        std::vector<ActionId> action = env.joint_action_from_index(idx);
        std::ostringstream act;
        act << "{";
        for (int a = 0; a < env.agent_count(); ++a) {
          if (a) act << ",";
          act << env.agents[a] << ":" << env.actions[a][action[a]];
        }
        act << "}";
        report.add("seriality",
                   "state " + env.states[s] + " has no successor under joint action " + act.str(),
                   env.states[s] + "/" + act.str());
      }
    }
  }

  return report;
}

std::vector<int> observation_class_ids(const Environment& env, AgentId agent) {
  if (agent < 0 || agent >= env.agent_count())
    throw std::invalid_argument("unknown agent id " + std::to_string(agent));
  std::vector<int> ids(env.states.size(), -1);
  std::unordered_map<std::string, int> symbol_class;
  for (int s = 0; s < env.state_count(); ++s) {
    if (!env.observations[agent][s])
      throw std::invalid_argument("agent " + env.agents[agent] +
                                  " has no observation for state " + env.states[s]);
    auto [it, fresh] = symbol_class.try_emplace(*env.observations[agent][s],
                                                static_cast<int>(symbol_class.size()));
    ids[s] = it->second;
    (void)fresh;
  }
  return ids;
}

std::vector<std::vector<StateId>> observation_classes(const Environment& env, AgentId agent) {
  std::vector<int> ids = observation_class_ids(env, agent);
  int n = ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end()) + 1;
  std::vector<std::vector<StateId>> classes(n);
  for (int s = 0; s < env.state_count(); ++s) classes[ids[s]].push_back(s);
  return classes;
}

std::vector<std::vector<StateId>> observation_classes(const Environment& env,
                                                      const std::string& agent) {
  auto id = env.agent_id(agent);
  if (!id) throw std::invalid_argument("unknown agent \"" + agent + "\"");
  return observation_classes(env, *id);
}

}  // namespace esl
