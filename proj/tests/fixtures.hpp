#pragma once

#include <string>

#include "esl/environment.hpp"

namespace esl::test {

// Two states, one agent with a constant observation, stay/flip actions and a
// proposition at s1. The workhorse regression model.
inline const char* kBitEnvJson = R"({
  "agents": ["a"],
  "states": ["s0", "s1"],
  "initial": ["s0"],
  "actions": {"a": ["stay", "flip"]},
  "observations": {"a": {"s0": "o", "s1": "o"}},
  "propositions": {"p": ["s1"]},
  "transitions": [
    {"from": "s0", "action": {"a": "stay"}, "to": "s0"},
    {"from": "s0", "action": {"a": "flip"}, "to": "s1"},
    {"from": "s1", "action": {"a": "stay"}, "to": "s1"},
    {"from": "s1", "action": {"a": "flip"}, "to": "s0"}
  ]
})";

// Same shape with identity observations (two singleton classes).
inline const char* kObsEnvJson = R"({
  "agents": ["a"],
  "states": ["s0", "s1"],
  "initial": ["s0"],
  "actions": {"a": ["stay", "flip"]},
  "observations": {"a": {"s0": "s0", "s1": "s1"}},
  "propositions": {"p": ["s1"]},
  "transitions": [
    {"from": "s0", "action": {"a": "stay"}, "to": "s0"},
    {"from": "s0", "action": {"a": "flip"}, "to": "s1"},
    {"from": "s1", "action": {"a": "stay"}, "to": "s1"},
    {"from": "s1", "action": {"a": "flip"}, "to": "s0"}
  ]
})";

inline Environment bit_env() { return load_environment(kBitEnvJson); }
inline Environment obs_env() { return load_environment(kObsEnvJson); }

// 4 states, 2 agents with 2 observation classes and 2 actions each:
// 16 uniform-deterministic profiles, at most 64 product vertices.
inline const char* kTwoAgentEnvJson = R"({
  "agents": ["a", "b"],
  "states": ["s0", "s1", "s2", "s3"],
  "initial": ["s0"],
  "actions": {"a": ["hold", "move"], "b": ["hold", "move"]},
  "observations": {
    "a": {"s0": "lo", "s1": "lo", "s2": "hi", "s3": "hi"},
    "b": {"s0": "even", "s1": "odd", "s2": "even", "s3": "odd"}
  },
  "propositions": {"p": ["s3"], "q": ["s1", "s2"]},
  "transitions": [
    {"from": "s0", "action": {"a": "hold", "b": "hold"}, "to": "s0"},
    {"from": "s0", "action": {"a": "hold", "b": "move"}, "to": "s1"},
    {"from": "s0", "action": {"a": "move", "b": "hold"}, "to": "s2"},
    {"from": "s0", "action": {"a": "move", "b": "move"}, "to": "s3"},
    {"from": "s1", "action": {"a": "hold", "b": "hold"}, "to": "s1"},
    {"from": "s1", "action": {"a": "hold", "b": "move"}, "to": "s2"},
    {"from": "s1", "action": {"a": "move", "b": "hold"}, "to": "s3"},
    {"from": "s1", "action": {"a": "move", "b": "move"}, "to": "s0"},
    {"from": "s2", "action": {"a": "hold", "b": "hold"}, "to": "s2"},
    {"from": "s2", "action": {"a": "hold", "b": "move"}, "to": "s3"},
    {"from": "s2", "action": {"a": "move", "b": "hold"}, "to": "s0"},
    {"from": "s2", "action": {"a": "move", "b": "move"}, "to": "s1"},
    {"from": "s3", "action": {"a": "hold", "b": "hold"}, "to": "s3"},
    {"from": "s3", "action": {"a": "hold", "b": "move"}, "to": "s0"},
    {"from": "s3", "action": {"a": "move", "b": "hold"}, "to": "s1"},
    {"from": "s3", "action": {"a": "move", "b": "move"}, "to": "s2"}
  ]
})";

inline Environment two_agent_env() { return load_environment(kTwoAgentEnvJson); }

}  // namespace esl::test
