#include "esl/strategy.hpp"

#include <limits>
#include <stdexcept>

namespace esl {

namespace {

std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp) {
  std::uint64_t out = 1;
  for (std::uint64_t i = 0; i < exp; ++i) {
    if (base != 0 && out > std::numeric_limits<std::uint64_t>::max() / base)
      throw std::overflow_error("strategy count overflows 64 bits");
    out *= base;
  }
  return out;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (b != 0 && a > std::numeric_limits<std::uint64_t>::max() / b)
    throw std::overflow_error("strategy count overflows 64 bits");
  return a * b;
}

}  // namespace

StrategyClass parse_strategy_class(const std::string& tag) {
  if (tag == "all") return StrategyClass::All;
  if (tag == "det") return StrategyClass::Det;
  if (tag == "unif") return StrategyClass::Unif;
  if (tag == "unif-det" || tag == "unif_det") return StrategyClass::UnifDet;
  throw std::invalid_argument("unknown strategy class \"" + tag +
                              "\" (expected all, det, unif or unif-det)");
}

std::string strategy_class_name(StrategyClass cls) {
  switch (cls) {
    case StrategyClass::All: return "all";
    case StrategyClass::Det: return "det";
    case StrategyClass::Unif: return "unif";
    case StrategyClass::UnifDet: return "unif-det";
  }
  return "?";
}

std::vector<ActionId> Strategy::choice(StateId s) const {
  std::vector<ActionId> out;
  std::uint32_t mask = choice_masks[s];
  for (int a = 0; mask != 0; ++a, mask >>= 1)
    if (mask & 1u) out.push_back(a);
  return out;
}

bool Strategy::is_deterministic() const {
  for (std::uint32_t m : choice_masks)
    if (m == 0 || (m & (m - 1)) != 0) return false;
  return true;
}

bool Strategy::is_uniform(const Environment& env) const {
  std::vector<int> cls = observation_class_ids(env, agent);
  std::vector<std::uint32_t> seen(choice_masks.size(), 0);
  std::vector<bool> has(choice_masks.size(), false);
  for (StateId s = 0; s < static_cast<int>(choice_masks.size()); ++s) {
    int c = cls[s];
    if (has[c] && seen[c] != choice_masks[s]) return false;
    has[c] = true;
    seen[c] = choice_masks[s];
  }
  return true;
}

AgentStrategySpace::AgentStrategySpace(const Environment& env, AgentId agent,
                                       StrategyClass cls)
    : agent_(agent), num_states_(env.state_count()) {
  if (agent < 0 || agent >= env.agent_count())
    throw std::invalid_argument("unknown agent id " + std::to_string(agent));
  int num_actions = static_cast<int>(env.actions[agent].size());
  if (num_actions == 0)
    throw std::invalid_argument("agent " + env.agents[agent] + " has no actions");
  if (num_actions > 31)
    throw std::invalid_argument("more than 31 actions per agent is not supported");

  bool uniform = cls == StrategyClass::Unif || cls == StrategyClass::UnifDet;
  bool deterministic = cls == StrategyClass::Det || cls == StrategyClass::UnifDet;

  if (uniform) {
    slot_of_state_ = observation_class_ids(env, agent);
    num_slots_ = 0;
    for (int c : slot_of_state_) num_slots_ = std::max(num_slots_, c + 1);
  } else {
    slot_of_state_.resize(num_states_);
    for (int s = 0; s < num_states_; ++s) slot_of_state_[s] = s;
    num_slots_ = num_states_;
  }

  if (deterministic) {
    for (int a = 0; a < num_actions; ++a) domain_.push_back(1u << a);
  } else {
    for (std::uint32_t m = 1; m < (1u << num_actions); ++m) domain_.push_back(m);
  }

  // slot 0 is most significant: lexicographic over states in file order
  stride_.assign(num_slots_, 1);
  count_ = 1;
  for (int slot = num_slots_ - 1; slot >= 0; --slot) {
    stride_[slot] = count_;
    count_ = checked_mul(count_, domain_.size());
  }
}

std::uint32_t AgentStrategySpace::mask_for(std::uint64_t strategy_index, StateId state) const {
  int slot = slot_of_state_[state];
  std::uint64_t digit = (strategy_index / stride_[slot]) % domain_.size();
  return domain_[digit];
}

Strategy AgentStrategySpace::strategy(std::uint64_t strategy_index) const {
  Strategy out;
  out.agent = agent_;
  out.choice_masks.resize(num_states_);
  for (StateId s = 0; s < num_states_; ++s) out.choice_masks[s] = mask_for(strategy_index, s);
  return out;
}

StrategySpace::StrategySpace(const Environment& env, StrategyClass cls) : cls_(cls) {
  for (AgentId a = 0; a < env.agent_count(); ++a) agents_.emplace_back(env, a, cls);
  profile_stride_.assign(agents_.size(), 1);
  profile_count_ = 1;
  for (int a = static_cast<int>(agents_.size()) - 1; a >= 0; --a) {
    profile_stride_[a] = profile_count_;
    profile_count_ = checked_mul(profile_count_, agents_[a].count());
  }
}

std::uint64_t StrategySpace::agent_strategy_index(std::uint64_t profile_index,
                                                  AgentId a) const {
  return (profile_index / profile_stride_[a]) % agents_[a].count();
}

std::uint32_t StrategySpace::mask_for(std::uint64_t profile_index, AgentId a,
                                      StateId state) const {
  return agents_[a].mask_for(agent_strategy_index(profile_index, a), state);
}

StrategyProfile StrategySpace::profile(std::uint64_t profile_index) const {
  StrategyProfile out;
  for (AgentId a = 0; a < agent_count(); ++a)
    out.strategies.push_back(agents_[a].strategy(agent_strategy_index(profile_index, a)));
  return out;
}

StrategyStream::StrategyStream(const Environment& env, AgentId agent, StrategyClass cls)
    : space_(env, agent, cls) {}

StrategyStream::StrategyStream(const Environment& env, const std::string& agent,
                               StrategyClass cls)
    : space_(env,
             [&] {
               auto id = env.agent_id(agent);
               if (!id) throw std::invalid_argument("unknown agent \"" + agent + "\"");
               return *id;
             }(),
             cls) {}

bool StrategyStream::next(Strategy& out) {
  if (index_ >= space_.count()) return false;
  out = space_.strategy(index_++);
  return true;
}

ProfileStream::ProfileStream(const Environment& env, StrategyClass cls) : space_(env, cls) {}

bool ProfileStream::next(StrategyProfile& out) {
  if (index_ >= space_.profile_count()) return false;
  out = space_.profile(index_++);
  return true;
}

std::uint64_t count_agent_strategies(const Environment& env, const std::string& agent,
                                     StrategyClass cls) {
  auto id = env.agent_id(agent);
  if (!id) throw std::invalid_argument("unknown agent \"" + agent + "\"");
  std::uint64_t actions = env.actions[*id].size();
  bool uniform = cls == StrategyClass::Unif || cls == StrategyClass::UnifDet;
  bool deterministic = cls == StrategyClass::Det || cls == StrategyClass::UnifDet;
  std::uint64_t slots =
      uniform ? observation_classes(env, *id).size() : static_cast<std::uint64_t>(env.state_count());
  std::uint64_t per_slot = deterministic ? actions : (checked_pow(2, actions) - 1);
  return checked_pow(per_slot, slots);
}

std::uint64_t count_profiles(const Environment& env, StrategyClass cls) {
  std::uint64_t n = 1;
  for (const auto& agent : env.agents) n = checked_mul(n, count_agent_strategies(env, agent, cls));
  return n;
}

std::vector<Strategy> enumerate_agent_strategies(const Environment& env,
                                                 const std::string& agent, StrategyClass cls) {
  StrategyStream stream(env, agent, cls);
  std::vector<Strategy> out;
  Strategy s;
  while (stream.next(s)) out.push_back(s);
  return out;
}

}  // namespace esl
