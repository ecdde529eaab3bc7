#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <set>

#include "json.hpp"

#include "esl/product.hpp"
#include "fixtures.hpp"

using namespace esl;

namespace {

// vertex lookup by (state name, constant action name) for unif-det products
VertexId find_vertex(const ProductSystem& ps, const std::string& state,
                     const std::string& action) {
  for (VertexId v = 0; v < ps.vertex_count(); ++v) {
    if (ps.env().states[ps.vertex(v).env_state] != state) continue;
    StrategyProfile p = ps.profile_of(v);
    auto acts = p.strategies[0].choice(0);
    if (ps.env().actions[0][acts[0]] == action) return v;
  }
  return -1;
}

}  // namespace

TEST_CASE("bit product has the three documented vertices") {
  ProductSystem ps = build_product(test::bit_env(), StrategyClass::UnifDet);
  CHECK(ps.vertex_count() == 3);
  CHECK(ps.edge_count() == 3);
  CHECK(ps.profile_count() == 2);

  VertexId s0_stay = find_vertex(ps, "s0", "stay");
  VertexId s0_flip = find_vertex(ps, "s0", "flip");
  VertexId s1_flip = find_vertex(ps, "s1", "flip");
  VertexId s1_stay = find_vertex(ps, "s1", "stay");
  CHECK(s0_stay == 0);  // deterministic construction order
  CHECK(s0_flip == 1);
  CHECK(s1_flip == 2);
  CHECK(s1_stay == -1);  // unreachable

  CHECK(ps.successors(s0_stay) == std::vector<VertexId>{s0_stay});
  CHECK(ps.successors(s0_flip) == std::vector<VertexId>{s1_flip});
  CHECK(ps.successors(s1_flip) == std::vector<VertexId>{s0_flip});

  CHECK(ps.initial_vertices() == std::vector<VertexId>{0, 1});
  CHECK(ps.describe(s0_stay) == "(s0, a:stay)");
}

TEST_CASE("unreachable states never become vertices") {
  std::string text = R"({
    "agents": ["a"],
    "states": ["s0", "s_dead"],
    "initial": ["s0"],
    "actions": {"a": ["go"]},
    "observations": {"a": {"s0": "o", "s_dead": "o"}},
    "propositions": {},
    "transitions": [
      {"from": "s0", "action": {"a": "go"}, "to": "s0"},
      {"from": "s_dead", "action": {"a": "go"}, "to": "s0"}
    ]
  })";
  ProductSystem ps = build_product(load_environment(text), StrategyClass::All);
  for (VertexId v = 0; v < ps.vertex_count(); ++v)
    CHECK(ps.env().states[ps.vertex(v).env_state] != "s_dead");
}

TEST_CASE("product edges are serial and preserve profiles") {
  for (StrategyClass cls : {StrategyClass::All, StrategyClass::Det, StrategyClass::Unif,
                            StrategyClass::UnifDet}) {
    ProductSystem ps = build_product(test::two_agent_env(), cls);
    for (VertexId v = 0; v < ps.vertex_count(); ++v) {
      CHECK_FALSE(ps.successors(v).empty());
      for (VertexId w : ps.successors(v))
        CHECK(ps.vertex(v).profile == ps.vertex(w).profile);
    }
  }
}

TEST_CASE("every edge is witnessed by an enabled joint action") {
  ProductSystem ps = build_product(test::two_agent_env(), StrategyClass::UnifDet);
  const Environment& env = ps.env();
  for (VertexId v = 0; v < ps.vertex_count(); ++v) {
    StrategyProfile profile = ps.profile_of(v);
    StateId s = ps.vertex(v).env_state;
    std::set<VertexId> expected;
    // enumerate enabled joint actions exhaustively
    for (ActionId ma = 0; ma < 2; ++ma) {
      for (ActionId mb = 0; mb < 2; ++mb) {
        if (!(profile.strategies[0].choice_masks[s] & (1u << ma))) continue;
        if (!(profile.strategies[1].choice_masks[s] & (1u << mb))) continue;
        for (const auto& t : env.transitions) {
          if (t.from != s || t.action != std::vector<ActionId>{ma, mb}) continue;
          for (VertexId w = 0; w < ps.vertex_count(); ++w)
            if (ps.vertex(w).env_state == t.to && ps.vertex(w).profile == ps.vertex(v).profile)
              expected.insert(w);
        }
      }
    }
    std::set<VertexId> got(ps.successors(v).begin(), ps.successors(v).end());
    CHECK(got == expected);
  }
}

TEST_CASE("BFS parents replay to concrete paths") {
  ProductSystem ps = build_product(test::two_agent_env(), StrategyClass::Unif);
  const Environment& env = ps.env();
  for (VertexId v = 0; v < ps.vertex_count(); ++v) {
    VertexId cursor = v;
    int steps = 0;
    while (ps.discovery(cursor).parent != -1) {
      const auto& d = ps.discovery(cursor);
      StateId from = ps.vertex(d.parent).env_state;
      StateId to = ps.vertex(cursor).env_state;
      CHECK(ps.vertex(d.parent).profile == ps.vertex(cursor).profile);
      // the recorded action is enabled by the profile at the parent
      for (AgentId a = 0; a < env.agent_count(); ++a) {
        std::uint32_t mask = ps.strategies().mask_for(ps.vertex(d.parent).profile, a, from);
        CHECK((mask & (1u << d.action[a])) != 0);
      }
      // and the environment has the transition
      bool found = false;
      for (const auto& t : env.transitions)
        if (t.from == from && t.to == to && t.action == d.action) found = true;
      CHECK(found);
      cursor = d.parent;
      REQUIRE(++steps <= ps.vertex_count());
    }
    // the walk ends at an initial vertex
    bool is_initial = false;
    for (VertexId i : ps.initial_vertices())
      if (i == cursor) is_initial = true;
    CHECK(is_initial);
  }
}

TEST_CASE("locals_equal distinguishes the three agent kinds") {
  ProductSystem ps = build_product(test::bit_env(), StrategyClass::UnifDet);
  VertexId s0_stay = 0, s1_flip = 2;
  CHECK(ps.locals_equal(s0_stay, s1_flip, ExtendedAgent::base("a")));  // constant observation
  CHECK_FALSE(ps.locals_equal(s0_stay, s1_flip, ExtendedAgent::sigma("a")));
  CHECK_FALSE(ps.locals_equal(s0_stay, s1_flip, ExtendedAgent::environment()));
  for (VertexId v = 0; v < ps.vertex_count(); ++v) {
    CHECK(ps.locals_equal(v, v, ExtendedAgent::base("a")));
    CHECK(ps.locals_equal(v, v, ExtendedAgent::sigma("a")));
    CHECK(ps.locals_equal(v, v, ExtendedAgent::environment()));
  }
  CHECK_THROWS_AS(ps.locals_equal(0, 0, ExtendedAgent::base("z")), std::invalid_argument);
}

TEST_CASE("locals_equal is an equivalence relation") {
  ProductSystem ps = build_product(test::two_agent_env(), StrategyClass::Unif);
  std::mt19937_64 rng(3);
  std::vector<ExtendedAgent> whos = {ExtendedAgent::base("a"), ExtendedAgent::base("b"),
                                     ExtendedAgent::sigma("a"), ExtendedAgent::sigma("b"),
                                     ExtendedAgent::environment()};
  for (int i = 0; i < 2000; ++i) {
    VertexId g = static_cast<VertexId>(rng() % ps.vertex_count());
    VertexId h = static_cast<VertexId>(rng() % ps.vertex_count());
    VertexId k = static_cast<VertexId>(rng() % ps.vertex_count());
    const auto& who = whos[rng() % whos.size()];
    CHECK(ps.locals_equal(g, g, who));
    CHECK(ps.locals_equal(g, h, who) == ps.locals_equal(h, g, who));
    if (ps.locals_equal(g, h, who) && ps.locals_equal(h, k, who))
      CHECK(ps.locals_equal(g, k, who));
  }
}

TEST_CASE("the vertex cap reports the attempted profile count") {
  try {
    build_product(test::two_agent_env(), StrategyClass::All, 50);
    FAIL("expected resource_limit_error");
  } catch (const resource_limit_error& e) {
    CHECK(e.attempted_profiles() == count_profiles(test::two_agent_env(), StrategyClass::All));
  }
}

TEST_CASE("invalid environments are rejected by build_product") {
  Environment env = test::bit_env();
  env.transitions.erase(env.transitions.begin());
  CHECK_THROWS_AS(build_product(env, StrategyClass::UnifDet), std::invalid_argument);
}

TEST_CASE("the product dump is valid JSON with the documented shape") {
  ProductSystem ps = build_product(test::bit_env(), StrategyClass::UnifDet);
  nlohmann::json j = nlohmann::json::parse(ps.dump_json());
  CHECK(j["class"] == "unif-det");
  REQUIRE(j["vertices"].size() == 3);
  CHECK(j["vertices"][0]["index"] == 0);
  CHECK(j["vertices"][0]["state"] == "s0");
  // uniform strategies are keyed by observation symbol
  CHECK(j["vertices"][0]["profile"]["a"]["o"] == nlohmann::json::array({"stay"}));
  CHECK(j["edges"].size() == 3);
  CHECK(j["initial"] == nlohmann::json::array({0, 1}));

  // non-uniform strategies fall back to state keys
  ProductSystem all = build_product(test::obs_env(), StrategyClass::All);
  nlohmann::json ja = nlohmann::json::parse(all.dump_json());
  bool state_keyed = false;
  for (const auto& v : ja["vertices"])
    if (v["profile"]["a"].contains("s0") && v["profile"]["a"].contains("s1")) state_keyed = true;
  CHECK(state_keyed);
}
