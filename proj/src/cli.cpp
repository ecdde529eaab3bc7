#include "esl/cli.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "esl/checker.hpp"
#include "esl/environment.hpp"
#include "esl/formula.hpp"
#include "esl/oracle.hpp"
#include "esl/product.hpp"
#include "esl/strategy.hpp"

namespace esl {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFails = 1;
constexpr int kExitError = 2;

// CLI11's vector overload wants the arguments reversed
void parse_args(CLI::App& app, std::vector<std::string> args) {
  std::reverse(args.begin(), args.end());
  app.parse(std::move(args));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open \"" + path + "\"");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

Environment load_and_validate(const std::string& path, bool complete_self_loops,
                              std::ostream& err) {
  Environment env = load_environment(read_file(path), complete_self_loops);
  ValidationReport report = validate_environment(env);
  if (!report.ok()) {
    err << "environment " << path << " is invalid:\n";
    for (const auto& v : report.violations)
      err << "  [" << v.rule << "] " << v.detail << "\n";
    throw std::runtime_error("validation failed");
  }
  return env;
}

std::vector<std::string> formulas_from_file(const std::string& path) {
  std::istringstream in(read_file(path));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    auto end = line.find_last_not_of(" \t\r");
    out.push_back(line.substr(begin, end - begin + 1));
  }
  return out;
}

ordered_json vertex_json(const ProductSystem& ps, VertexId v) {
  ordered_json j;
  j["index"] = v;
  j["state"] = ps.env().states[ps.vertex(v).env_state];
  ordered_json profile = ordered_json::object();
  StrategyProfile sp = ps.profile_of(v);
  for (AgentId a = 0; a < ps.env().agent_count(); ++a) {
    ordered_json per_state = ordered_json::object();
    for (StateId s = 0; s < ps.env().state_count(); ++s) {
      ordered_json acts = ordered_json::array();
      for (ActionId act : sp.strategies[a].choice(s))
        acts.push_back(ps.env().actions[a][act]);
      per_state[ps.env().states[s]] = acts;
    }
    profile[ps.env().agents[a]] = per_state;
  }
  j["profile"] = profile;
  return j;
}

struct CheckCommand {
  std::string env_path;
  std::string formula;
  std::string formula_file;
  std::string class_tag = "unif-det";
  std::string format = "text";
  std::string dump_product_path;
  std::uint64_t vertex_cap = ProductSystem::kDefaultVertexCap;
  bool stats = false;
  bool complete_self_loops = false;

  void add_options(CLI::App& app) {
    app.add_option("--env", env_path, "environment JSON file")->required();
    app.add_option("--formula", formula, "formula to check");
    app.add_option("--formula-file", formula_file,
                   "file with one formula per line ('#' comments)");
    app.add_option("--class", class_tag, "strategy class: all, det, unif, unif-det");
    app.add_option("--format", format, "output format: text or json")
        ->check(CLI::IsMember({"text", "json"}));
    app.add_option("--dump-product", dump_product_path, "write the product system as JSON");
    app.add_option("--vertex-cap", vertex_cap, "abort when the product exceeds this size");
    app.add_flag("--stats", stats, "print product/cache statistics");
    app.add_flag("--complete-self-loops", complete_self_loops,
                 "repair missing (state, joint action) successors with self loops");
  }

  int run(std::ostream& out, std::ostream& err) {
    if (formula.empty() == formula_file.empty()) {
      err << "error: exactly one of --formula and --formula-file is required\n";
      return kExitError;
    }
    StrategyClass cls = parse_strategy_class(class_tag);
    Environment env = load_and_validate(env_path, complete_self_loops, err);

    std::vector<std::string> inputs;
    if (!formula.empty())
      inputs.push_back(formula);
    else
      inputs = formulas_from_file(formula_file);
    if (inputs.empty()) {
      err << "error: no formulas given\n";
      return kExitError;
    }

    std::vector<Formula> parsed;
    for (const auto& text : inputs) {
      Formula f = parse_formula(text);
      std::vector<std::string> warnings;
      expand_derived(f, &warnings);
      for (const auto& w : warnings) err << "warning: " << w << " in \"" << text << "\"\n";
      ValidationReport wf = check_well_formed(f, env);
      if (!wf.ok()) {
        err << "error: formula \"" << text << "\" is not well-formed:\n";
        for (const auto& v : wf.violations) err << "  " << v.detail << "\n";
        return kExitError;
      }
      auto free = free_variables(f);
      if (!free.empty()) {
        std::string names;
        for (const auto& v : free) names += (names.empty() ? "" : ", ") + v;
        err << "error: free variables {" << names << "}: CLI accepts sentences only\n";
        return kExitError;
      }
      parsed.push_back(f);
    }

    ProductSystem ps = build_product(env, cls, vertex_cap);
    if (!dump_product_path.empty()) {
      std::ofstream dump(dump_product_path, std::ios::binary);
      if (!dump) {
        err << "error: cannot write \"" << dump_product_path << "\"\n";
        return kExitError;
      }
      dump << ps.dump_json();
    }

    bool all_hold = true;
    ordered_json jformulas = ordered_json::array();
    CheckStats last_stats;
    for (std::size_t i = 0; i < parsed.size(); ++i) {
      Verdict verdict = check(ps, {}, parsed[i]);
      all_hold = all_hold && verdict.holds;
      last_stats = verdict.stats;

      if (format == "text") {
        out << "FORMULA " << (i + 1) << ": " << (verdict.holds ? "HOLDS" : "FAILS");
        if (!verdict.holds && verdict.counterexample)
          out << " counterexample " << ps.describe(*verdict.counterexample);
        if (verdict.holds && !verdict.witness_bindings.empty()) {
          out << " witness";
          for (std::size_t w = 0; w < verdict.witness_bindings.size(); ++w) {
            const auto& [var, vtx] = verdict.witness_bindings[w];
            out << (w ? ", " : " ") << var << "=" << ps.describe(vtx);
          }
        }
        out << "\n";
      } else {
        ordered_json j;
        j["index"] = i + 1;
        j["input"] = inputs[i];
        j["holds"] = verdict.holds;
        if (verdict.counterexample)
          j["counterexample"] = vertex_json(ps, *verdict.counterexample);
        if (!verdict.witness_bindings.empty()) {
          ordered_json witness = ordered_json::object();
          for (const auto& [var, vtx] : verdict.witness_bindings)
            witness[var] = vertex_json(ps, vtx);
          j["witness"] = witness;
        }
        jformulas.push_back(j);
      }
    }

    if (format == "text") {
      if (stats) {
        double rate = last_stats.cache_lookups
                          ? static_cast<double>(last_stats.cache_hits) /
                                static_cast<double>(last_stats.cache_lookups)
                          : 0.0;
        out << "STATS profiles=" << last_stats.profile_count
            << " vertices=" << last_stats.vertex_count << " edges=" << last_stats.edge_count
            << " cache_entries=" << last_stats.cache_entries << " cache_hit_rate=" << rate
            << " eval_ms=" << last_stats.eval_seconds * 1000.0 << "\n";
      }
    } else {
      ordered_json j;
      j["formulas"] = jformulas;
      if (stats) {
        ordered_json js;
        js["profiles"] = last_stats.profile_count;
        js["vertices"] = last_stats.vertex_count;
        js["edges"] = last_stats.edge_count;
        js["cache_entries"] = last_stats.cache_entries;
        js["cache_lookups"] = last_stats.cache_lookups;
        js["cache_hits"] = last_stats.cache_hits;
        js["eval_seconds"] = last_stats.eval_seconds;
        j["stats"] = js;
      }
      out << j.dump(2) << "\n";
    }
    return all_hold ? kExitOk : kExitFails;
  }
};

int run_validate(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"validate an environment file"};
  std::string env_path;
  std::string format = "text";
  bool complete_self_loops = false;
  app.add_option("--env", env_path, "environment JSON file")->required();
  app.add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  app.add_flag("--complete-self-loops", complete_self_loops);
  try {
    parse_args(app, args);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitError;
  }
  Environment env = load_environment(read_file(env_path), complete_self_loops);
  ValidationReport report = validate_environment(env);
  if (format == "json") {
    ordered_json j;
    j["ok"] = report.ok();
    ordered_json v = ordered_json::array();
    for (const auto& violation : report.violations) {
      ordered_json jv;
      jv["rule"] = violation.rule;
      jv["detail"] = violation.detail;
      jv["element"] = violation.element;
      v.push_back(jv);
    }
    j["violations"] = v;
    out << j.dump(2) << "\n";
  } else if (report.ok()) {
    out << "OK: " << env.states.size() << " states, " << env.agents.size() << " agents, "
        << env.transitions.size() << " transitions\n";
  } else {
    for (const auto& violation : report.violations)
      out << "VIOLATION [" << violation.rule << "] " << violation.detail << "\n";
  }
  return report.ok() ? kExitOk : kExitError;
}

int run_count(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"count strategies per agent and profiles"};
  std::string env_path;
  std::string class_tag = "unif-det";
  std::string format = "text";
  bool complete_self_loops = false;
  app.add_option("--env", env_path)->required();
  app.add_option("--class", class_tag);
  app.add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  app.add_flag("--complete-self-loops", complete_self_loops);
  try {
    parse_args(app, args);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitError;
  }
  StrategyClass cls = parse_strategy_class(class_tag);
  Environment env = load_and_validate(env_path, complete_self_loops, err);
  ordered_json j;
  j["class"] = strategy_class_name(cls);
  ordered_json agents = ordered_json::object();
  for (const auto& agent : env.agents) {
    std::uint64_t n = count_agent_strategies(env, agent, cls);
    agents[agent] = n;
    if (format == "text") out << "AGENT " << agent << ": " << n << " strategies\n";
  }
  std::uint64_t profiles = count_profiles(env, cls);
  if (format == "text") {
    out << "PROFILES: " << profiles << "\n";
  } else {
    j["agents"] = agents;
    j["profiles"] = profiles;
    out << j.dump(2) << "\n";
  }
  return kExitOk;
}

int run_oracle(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"differential suite: checker vs naive reference"};
  oracle::DiffOptions options;
  std::string class_tag;
  app.add_option("--seed", options.seed, "base seed");
  app.add_option("--cases", options.cases, "number of random instances");
  app.add_option("--class", class_tag, "restrict to one strategy class");
  app.add_option("--max-pairs", options.max_pairs, "redraw instances above this size");
  try {
    parse_args(app, args);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitError;
  }
  if (!class_tag.empty()) options.only_class = parse_strategy_class(class_tag);
  oracle::DiffResult result = oracle::run_differential(options, &err);
  out << "ORACLE cases=" << result.cases_run << " mismatches=" << result.mismatches << " "
      << (result.mismatches == 0 ? "PASS" : "FAIL") << "\n";
  if (result.mismatches != 0) {
    out << "first failing instance (class " << result.failing_class << "):\n"
        << "formula: " << result.failing_formula << "\n"
        << result.failing_env;
    return kExitFails;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> rest = args;
  std::string command = "check";
  if (!rest.empty() && (rest[0] == "check" || rest[0] == "validate" || rest[0] == "count" ||
                        rest[0] == "oracle")) {
    command = rest[0];
    rest.erase(rest.begin());
  }

  try {
    if (command == "validate") return run_validate(rest, out, err);
    if (command == "count") return run_count(rest, out, err);
    if (command == "oracle") return run_oracle(rest, out, err);

    CLI::App app{"eslcheck: strategy-space model checker", "eslcheck"};
    CheckCommand cmd;
    cmd.add_options(app);
    try {
      parse_args(app, rest);
    } catch (const CLI::CallForHelp&) {
      out << app.help();
      return kExitOk;
    } catch (const CLI::ParseError& e) {
      err << e.what() << "\n";
      return kExitError;
    }
    return cmd.run(out, err);
  } catch (const parse_error& e) {
    err << "formula error: " << e.what() << "\n";
    return kExitError;
  } catch (const load_error& e) {
    err << "environment error: " << e.what() << "\n";
    return kExitError;
  } catch (const resource_limit_error& e) {
    err << "resource limit: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace esl
