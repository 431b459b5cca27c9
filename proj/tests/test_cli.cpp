#include "doctest.h"

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "cj/session.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
};

Result Run(const std::string& args) {
  const std::string cmd = std::string(CJ_TOOL_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t got = fread(buf, 1, sizeof buf, pipe)) out.append(buf, got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

Result RunWithStderr(const std::string& args) {
  const std::string cmd = std::string(CJ_TOOL_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  while (std::size_t got = fread(buf, 1, sizeof buf, pipe)) out.append(buf, got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

fs::path Fresh(const std::string& name) {
  const fs::path p = fs::path(CJ_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void Write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

fs::path ScriptedExport(const std::string& name, std::size_t n, int judgements) {
  cj::SessionHeader h;
  h.id = name;
  for (std::size_t i = 0; i < n; ++i) h.items.push_back({"w" + std::to_string(i), "", ""});
  h.k = 10;
  h.seed = 4;
  cj::Session s = cj::Session::Create(h);
  for (int t = 0; t < judgements; ++t) {
    const auto p = s.NextPair().pair;
    const cj::ItemId winner = t % 5 == 4 ? std::max(p.left, p.right) : std::min(p.left, p.right);
    s.Submit(h.items[p.left].id, h.items[p.right].id, h.items[winner].id, "", t);
  }
  const fs::path path = Fresh(name + ".json");
  Write(path, cj::ExportSession(s).dump());
  return path;
}

}  // namespace

TEST_CASE("simulate is deterministic") {
  const fs::path a = Fresh("cli_sim_a");
  const fs::path b = Fresh("cli_sim_b");
  CHECK(Run("simulate --n 5 --k 10 --repeats 1 --seed 7 --out " + a.string()).code == 0);
  CHECK(Run("simulate --n 5 --k 10 --repeats 1 --seed 7 --jobs 2 --out " + b.string()).code == 0);
  const std::string steps = Slurp(a / "steps.csv");
  CHECK(steps == Slurp(b / "steps.csv"));
  CHECK(Slurp(a / "summary.csv") == Slurp(b / "summary.csv"));
  std::size_t lines = 0;
  for (char c : steps) lines += c == '\n';
  CHECK(lines == 1 + 6 * 50);
  CHECK(fs::exists(a / "manifest.json"));
}

TEST_CASE("simulate reads a config file and flags override it") {
  const fs::path dir = Fresh("cli_cfg");
  fs::create_directories(dir);
  Write(dir / "config.json", R"({"n":[4],"k":[3],"repeats":2,"methods":["BCJ-E","BTM-NR"],"seed":1})");
  CHECK(Run("simulate --config " + (dir / "config.json").string() + " --k 2 --out " + (dir / "run").string()).code == 0);
  const std::string summary = Slurp(dir / "run" / "summary.csv");
  CHECK(summary.find("4,2,BCJ-E,") != std::string::npos);
  CHECK(summary.find("4,2,BTM-NR,") != std::string::npos);
  CHECK(summary.find("BCJ-R") == std::string::npos);

  Write(dir / "bad.json", R"({"n":[4],"k":[3],"repeats":"two"})");
  const Result bad = RunWithStderr("simulate --config " + (dir / "bad.json").string() + " --out " + (dir / "x").string());
  CHECK(bad.code == 1);
  CHECK(bad.out.find("repeats") != std::string::npos);
}

TEST_CASE("validation and I/O exit codes") {
  const fs::path dir = Fresh("cli_bad");
  CHECK(Run("simulate --n 5 --k 0 --repeats 1 --out " + dir.string()).code == 1);
  CHECK(Run("simulate --n 5 --k 1 --methods XYZ --out " + dir.string()).code == 1);
  CHECK(Run("simulate --n 5").code == 1);
  CHECK(Run("report /nonexistent/session.json").code == 2);
  CHECK(Run("").code == 1);
}

TEST_CASE("offline report matches the core") {
  const fs::path fixture = ScriptedExport("cli_fifty", 5, 50);
  const Result r = Run("report " + fixture.string());
  REQUIRE(r.code == 0);
  const cj::Session s = cj::ImportSession(json::parse(Slurp(fixture)));
  CHECK(json::parse(r.out).dump() == cj::BuildReport(s).dump());

  const Result graded = Run("report " + fixture.string() + " --grades A:1,B:1,C:2,D:1 --threshold 0.9");
  REQUIRE(graded.code == 0);
  const json g = json::parse(graded.out)["grades"];
  const json expected = cj::BuildGradeReport(s, cj::ParseGradeSpec("A:1,B:1,C:2,D:1", 0.9));
  CHECK(g.dump() == expected.dump());

  const Result csv = Run("report " + fixture.string() + " --format csv --grades A:1,B:1,C:2,D:1");
  REQUIRE(csv.code == 0);
  CHECK(csv.out.rfind("id,rank,expected_rank,grade\n", 0) == 0);

  CHECK(Run("report " + fixture.string() + " --grades A:1,B:1").code == 1);

  const fs::path fresh = ScriptedExport("cli_fresh", 4, 0);
  const json uniform = json::parse(Run("report " + fresh.string()).out);
  for (const auto& item : uniform["items"]) CHECK(item["probs"] == uniform["items"][0]["probs"]);
}

TEST_CASE("corrupt exports report the byte offset") {
  const fs::path fixture = ScriptedExport("cli_corrupt", 3, 4);
  std::string text = Slurp(fixture);
  text.resize(text.size() / 2);
  Write(fixture, text);
  const Result r = RunWithStderr("report " + fixture.string());
  CHECK(r.code == 1);
  CHECK(r.out.find("byte") != std::string::npos);
}
