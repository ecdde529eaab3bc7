#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <functional>
#include <random>
#include <sstream>

#include "esl/checker.hpp"
#include "esl/oracle.hpp"
#include "fixtures.hpp"

using namespace esl;

TEST_CASE("the oracle system mirrors the bit product") {
  oracle::OracleSystem sys(test::bit_env(), StrategyClass::UnifDet);
  CHECK(sys.pair_count() == 3);
  CHECK(sys.initial_pairs().size() == 2);
}

TEST_CASE("naive_check on the bit environment") {
  Environment env = test::bit_env();
  CHECK_FALSE(oracle::naive_check(env, StrategyClass::UnifDet, {}, parse_formula("EF p")).holds);
  CHECK_FALSE(oracle::naive_check(env, StrategyClass::UnifDet, {}, parse_formula("C{a} p")).holds);
  CHECK(oracle::naive_check(env, StrategyClass::UnifDet, {}, parse_formula("true")).holds);
  CHECK(oracle::naive_check(env, StrategyClass::UnifDet, {},
                            parse_formula("exists x . D{}(loc({sigma(a)},x) -> EF p)"))
            .holds);
}

TEST_CASE("naive counterexamples name the first failing initial pair") {
  oracle::OracleSystem sys(test::bit_env(), StrategyClass::UnifDet);
  oracle::NaiveVerdict v = oracle::naive_check(sys, {}, parse_formula("EF p"));
  REQUIRE(v.counterexample.has_value());
  oracle::OracleSystem::Description d = sys.describe(*v.counterexample);
  CHECK(d.state == "s0");
  CHECK(d.choices[0][0] == std::set<std::string>{"stay"});
  CHECK(d.choices[0][1] == std::set<std::string>{"stay"});
}

TEST_CASE("the oracle refuses systems beyond its size guard") {
  // 3^4 strategies per agent, squared, times 4 states: far past the guard
  CHECK_THROWS_AS(oracle::OracleSystem(test::two_agent_env(), StrategyClass::All),
                  std::length_error);
}

TEST_CASE("gfp of true is everything; of false, nothing") {
  ProductSystem ps = build_product(test::bit_env(), StrategyClass::UnifDet);
  CHECK(oracle::gfp_relativized_ck(ps, {"a"}, {"a"}, Formula::tt(), {}).all());
  CHECK(oracle::gfp_relativized_ck(ps, {"a"}, {"a"}, Formula::ff(), {}).none());
  CHECK_THROWS_AS(oracle::gfp_relativized_ck(ps, {}, {"a"}, Formula::tt(), {}),
                  std::invalid_argument);
}

TEST_CASE("gfp of AG ~p keeps only the stay class") {
  ProductSystem ps = build_product(test::bit_env(), StrategyClass::UnifDet);
  VertexSet x = oracle::gfp_relativized_ck(ps, {"a"}, {"a"}, parse_formula("AG ~p"), {});
  CHECK(x.members() == std::vector<int>{0});  // (s0,stay)
}

TEST_CASE("random environments are valid, serial and deterministic in the seed") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    oracle::GenBounds b;
    b.max_states = 3;
    b.max_agents = 1;
    b.max_actions_per_agent = 2;
    b.max_props = 1;
    b.max_obs_classes = 2;
    b.seed = seed;
    Environment env = oracle::random_environment(b);
    CHECK(validate_environment(env).ok());
    CHECK(env == oracle::random_environment(b));
  }
  oracle::GenBounds single;
  single.max_states = 1;
  single.seed = 42;
  Environment tiny = oracle::random_environment(single);
  CHECK(tiny.state_count() == 1);
  CHECK(validate_environment(tiny).ok());
}

TEST_CASE("random formulas are deterministic, closed and well-formed") {
  oracle::GenBounds gb;
  gb.seed = 42;
  Environment env = oracle::random_environment(gb);
  oracle::FormulaBounds fb;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    std::mt19937_64 r1(seed), r2(seed);
    Formula a = oracle::random_formula(r1, env, fb);
    Formula b = oracle::random_formula(r2, env, fb);
    CHECK(a == b);
    CHECK(free_variables(a).empty());
    CHECK(check_well_formed(a, env).ok());
  }
  oracle::FormulaBounds depth0;
  depth0.max_depth = 0;
  std::mt19937_64 rng(5);
  Formula leaf = oracle::random_formula(rng, env, depth0);
  CHECK(leaf.arity() == 0);
}

TEST_CASE("run-based spot check: nested next operators against run prefixes") {
  // evaluate AX/EX towers by explicitly enumerating run prefixes
  std::mt19937_64 rng(51);
  for (int i = 0; i < 25; ++i) {
    oracle::GenBounds gb;
    gb.seed = 6000 + i;
    Environment env = oracle::random_environment(gb);
    StrategyClass cls = static_cast<StrategyClass>(i % 4);
    if (count_profiles(env, cls) * env.state_count() > 300) continue;
    ProductSystem ps = build_product(env, cls);
    Evaluator eval(ps);

    // random nested AX/EX formula of depth <= 3 over propositions
    std::function<Formula(int)> gen = [&](int depth) -> Formula {
      if (depth == 0 || rng() % 4 == 0) {
        if (env.propositions.empty()) return Formula::tt();
        return Formula::prop(env.propositions[rng() % env.propositions.size()].name);
      }
      Formula body = gen(depth - 1);
      switch (rng() % 3) {
        case 0: return Formula::ax(body);
        case 1: return Formula::ex(body);
        default: return Formula::lnot(body);
      }
    };
    Formula f = gen(3);
    VertexSet sat = eval.sat(f, {});

    // prefix-tree evaluation
    std::function<bool(VertexId, Formula)> run_eval = [&](VertexId v, Formula g) -> bool {
      switch (g.op()) {
        case Op::True: return true;
        case Op::Prop: {
          const Proposition* p = env.find_proposition(g.text());
          return p->states[ps.vertex(v).env_state];
        }
        case Op::Not: return !run_eval(v, g.kid(0));
        case Op::AX: {
          for (VertexId w : ps.successors(v))
            if (!run_eval(w, g.kid(0))) return false;
          return true;
        }
        case Op::EX: {
          for (VertexId w : ps.successors(v))
            if (run_eval(w, g.kid(0))) return true;
          return false;
        }
        default: return false;
      }
    };
    for (VertexId v = 0; v < ps.vertex_count(); ++v) CHECK(sat.test(v) == run_eval(v, f));
  }
}

TEST_CASE("differential suite: a quick slice agrees") {
  oracle::DiffOptions options;
  options.seed = 99;
  options.cases = 40;
  std::ostringstream log;
  oracle::DiffResult result = oracle::run_differential(options, &log);
  CHECK(result.cases_run == 40);
  CHECK(result.mismatches == 0);
  if (result.mismatches) {
    MESSAGE(log.str());
    MESSAGE(result.failing_env);
    MESSAGE(result.failing_formula);
  }
}
