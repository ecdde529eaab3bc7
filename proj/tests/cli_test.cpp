#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "esl/cli.hpp"
#include "fixtures.hpp"

using namespace esl;

namespace {

struct CliRun {
  int exit_code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

class TempFile {
 public:
  TempFile(const std::string& name, const std::string& content)
      : path_(std::string("cli_test_") + name) {
    std::ofstream f(path_, std::ios::binary);
    f << content;
  }
  ~TempFile() { std::remove(path_.c_str()); }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace

TEST_CASE("a failing formula exits 1 with the documented line") {
  TempFile env("bit.json", test::kBitEnvJson);
  CliRun r = run({"--env", env.path(), "--class", "unif-det", "--formula", "EF p"});
  CHECK(r.exit_code == 1);
  CHECK(r.out == "FORMULA 1: FAILS counterexample (s0, a:stay)\n");
}

TEST_CASE("a holding formula exits 0 and reports its witness") {
  TempFile env("bit2.json", test::kBitEnvJson);
  CliRun r = run({"--env", env.path(), "--class", "unif-det", "--formula",
                  "exists x . D{}(loc({sigma(a)},x) -> EF p)"});
  CHECK(r.exit_code == 0);
  CHECK(r.out == "FORMULA 1: HOLDS witness x=(s0, a:flip)\n");
}

TEST_CASE("free variables are rejected with exit 2") {
  TempFile env("bit3.json", test::kBitEnvJson);
  CliRun r = run({"--env", env.path(), "--formula", "loc(a,x)"});
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("free variables {x}: CLI accepts sentences only") != std::string::npos);
}

TEST_CASE("usage, parse and validation errors exit 2") {
  TempFile env("bit4.json", test::kBitEnvJson);
  CHECK(run({"--formula", "p"}).exit_code == 2);                          // missing --env
  CHECK(run({"--env", env.path()}).exit_code == 2);                      // no formula source
  CHECK(run({"--env", env.path(), "--formula", "p", "--formula-file", "x"}).exit_code == 2);
  CHECK(run({"--env", env.path(), "--formula", "(p"}).exit_code == 2);   // parse error
  CHECK(run({"--env", env.path(), "--formula", "q"}).exit_code == 2);    // undeclared prop
  CHECK(run({"--env", "does_not_exist.json", "--formula", "p"}).exit_code == 2);

  std::string broken = test::kBitEnvJson;
  broken.erase(broken.find("    {\"from\": \"s0\", \"action\": {\"a\": \"flip\"}, \"to\": \"s1\"},\n"),
               std::string("    {\"from\": \"s0\", \"action\": {\"a\": \"flip\"}, \"to\": \"s1\"},\n").size());
  TempFile nonserial("nonserial.json", broken);
  CHECK(run({"--env", nonserial.path(), "--formula", "p"}).exit_code == 2);
  // but the repair flag makes it pass validation
  CHECK(run({"--env", nonserial.path(), "--formula", "p", "--complete-self-loops"}).exit_code ==
        1);
}

TEST_CASE("formula files run every line and combine exit codes") {
  TempFile env("bit5.json", test::kBitEnvJson);
  TempFile formulas("formulas.txt",
                    "# regression formulas\n"
                    "EF p\n"
                    "\n"
                    "exists x . D{}(loc({sigma(a)},x) -> EF p)  # witness expected\n");
  CliRun r = run({"--env", env.path(), "--formula-file", formulas.path()});
  CHECK(r.exit_code == 1);
  CHECK(r.out.find("FORMULA 1: FAILS") != std::string::npos);
  CHECK(r.out.find("FORMULA 2: HOLDS") != std::string::npos);
}

TEST_CASE("text and json outputs encode the same verdicts") {
  TempFile env("bit6.json", test::kBitEnvJson);
  TempFile formulas("formulas2.txt", "EF p\nAG ~p\nexists x . loc(sigma(a), x)\n");
  CliRun text = run({"--env", env.path(), "--formula-file", formulas.path()});
  CliRun json = run({"--env", env.path(), "--formula-file", formulas.path(), "--format", "json"});
  CHECK(text.exit_code == json.exit_code);

  auto j = nlohmann::json::parse(json.out);
  REQUIRE(j["formulas"].size() == 3);
  std::istringstream lines(text.out);
  std::string line;
  for (const auto& jf : j["formulas"]) {
    REQUIRE(std::getline(lines, line));
    bool text_holds = line.find("HOLDS") != std::string::npos;
    CHECK(text_holds == jf["holds"].get<bool>());
  }
  // counterexample content matches the text rendering
  CHECK(j["formulas"][0]["counterexample"]["state"] == "s0");
  CHECK(j["formulas"][0]["counterexample"]["profile"]["a"]["s0"] ==
        nlohmann::json::array({"stay"}));
}

TEST_CASE("stats block appears only when requested") {
  TempFile env("bit7.json", test::kBitEnvJson);
  CliRun without = run({"--env", env.path(), "--formula", "EF p"});
  CHECK(without.out.find("STATS") == std::string::npos);
  CliRun with = run({"--env", env.path(), "--formula", "EF p", "--stats"});
  CHECK(with.out.find("STATS profiles=2 vertices=3 edges=3") != std::string::npos);

  CliRun all = run({"--env", env.path(), "--class", "all", "--formula", "EF p", "--stats"});
  CHECK(all.out.find("profiles=9") != std::string::npos);
}

TEST_CASE("dump-product writes the product JSON") {
  TempFile env("bit8.json", test::kBitEnvJson);
  std::string dump_path = "cli_test_dump.json";
  CliRun r = run({"--env", env.path(), "--formula", "true", "--dump-product", dump_path});
  CHECK(r.exit_code == 0);
  std::ifstream in(dump_path);
  REQUIRE(in.good());
  auto j = nlohmann::json::parse(in);
  CHECK(j["vertices"].size() == 3);
  std::remove(dump_path.c_str());
}

TEST_CASE("vertex cap trips with exit 2") {
  TempFile env("two.json", test::kTwoAgentEnvJson);
  CliRun r = run({"--env", env.path(), "--class", "all", "--formula", "true", "--vertex-cap",
                  "10"});
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("resource limit") != std::string::npos);
}

TEST_CASE("validate subcommand") {
  TempFile env("bit9.json", test::kBitEnvJson);
  CliRun ok = run({"validate", "--env", env.path()});
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("OK") != std::string::npos);

  std::string broken = test::kBitEnvJson;
  broken.erase(broken.find(", \"s1\": \"o\""), 11);
  TempFile bad("bad.json", broken);
  CliRun fail = run({"validate", "--env", bad.path()});
  CHECK(fail.exit_code == 2);
  CHECK(fail.out.find("observation-totality") != std::string::npos);
}

TEST_CASE("count subcommand prints the strategy counts") {
  TempFile env("bit10.json", test::kBitEnvJson);
  CliRun r = run({"count", "--env", env.path(), "--class", "all"});
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("AGENT a: 9 strategies") != std::string::npos);
  CHECK(r.out.find("PROFILES: 9") != std::string::npos);
}

TEST_CASE("oracle subcommand reports a pass summary") {
  CliRun r = run({"oracle", "--seed", "7", "--cases", "12"});
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("ORACLE cases=12 mismatches=0 PASS") != std::string::npos);
}
