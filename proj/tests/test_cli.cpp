#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "robinhood/cli.hpp"
#include "robinhood/schedule_json.hpp"

using namespace robinhood;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  Run result;
  result.code = cli::dispatch(args, out, err);
  result.out = out.str();
  result.err = err.str();
  return result;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("robinhood-cli-" + std::to_string(::getpid()) + "-" + std::to_string(++count_));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path file(const std::string& name, const std::string& text = {}) const {
    fs::path p = path_ / name;
    if (!text.empty()) std::ofstream(p) << text;
    return p;
  }

 private:
  fs::path path_;
  static inline int count_ = 0;
};

const char* kHarmonic =
    R"({"r":{"kind":"constant","value":1},"s":{"kind":"constant","value":2},"b":{"kind":"constant","value":0}})";

}  // namespace

TEST_CASE("classify prints a verdict") {
  TempDir dir;
  auto sched = dir.file("h.json", kHarmonic);
  auto r = run({"classify", sched.string(), "--horizon", "100"});
  CHECK(r.code == 0);
  auto j = Json::parse(r.out);
  CHECK(j["kind"] == "RobinAlmostSurely");
  CHECK(j["rule"] == "Thm2.1");
  CHECK(r.out.rfind(R"({"certificate":)", 0) == 0);

  auto csv = run({"classify", sched.string(), "--horizon", "3", "--csv"});
  CHECK(csv.code == 0);
  CHECK(csv.out.rfind("i,r,s,b,L,Ltilde,term,partial_sum\n1,1,2,0,1,2,1/2,", 0) == 0);
}

TEST_CASE("survival in both spaces") {
  TempDir dir;
  auto sched = dir.file("h.json", kHarmonic);
  auto exact = run({"survival", sched.string(), "--day", "1", "--horizon", "99", "--space", "rational"});
  CHECK(exact.code == 0);
  CHECK(Json::parse(exact.out)["value"] == "1/100");
  auto product = run({"survival", sched.string(), "--day", "5", "--horizon", "99", "--mode", "paper"});
  CHECK(Json::parse(product.out)["value"] == "1/20");
  auto logv = run({"survival", sched.string(), "--day", "1", "--horizon", "99", "--space", "log"});
  CHECK(std::stod(Json::parse(logv.out)["value"].get<std::string>()) == doctest::Approx(0.01));
}

TEST_CASE("validate reports restrictions and exits 1 on invalid schedules") {
  TempDir dir;
  auto good = run({"validate", dir.file("h.json", kHarmonic).string(), "--horizon", "50"});
  CHECK(good.code == 0);
  CHECK(Json::parse(good.out)["restriction1_ok"] == true);

  auto bad = run({"validate",
                  dir.file("bad.json", R"({"r":{"kind":"constant","value":3},"s":{"kind":"constant","value":2},)"
                                       R"("b":{"kind":"constant","value":0}})")
                      .string(),
                  "--horizon", "10"});
  CHECK(bad.code == 1);
  CHECK(Json::parse(bad.out)["validity_ok"] == false);
}

TEST_CASE("malformed input exits 1 and names the field") {
  TempDir dir;
  auto wrong_kind = run({"classify", dir.file("w.json", R"({"r":{"kind":"constant","value":1},)"
                                                        R"("s":{"kind":"sqrt","value":2},)"
                                                        R"("b":{"kind":"constant","value":0}})")
                                         .string()});
  CHECK(wrong_kind.code == 1);
  CHECK(wrong_kind.err.find("/s/kind") != std::string::npos);
  CHECK(wrong_kind.err.find("ParseError") != std::string::npos);

  auto not_json = run({"classify", dir.file("n.json", "{\"r\": [1,").string()});
  CHECK(not_json.code == 1);
  CHECK(not_json.err.find("ParseError") != std::string::npos);

  auto missing = run({"classify", (dir.file("absent.json")).string()});
  CHECK(missing.code == 1);

  CHECK(run({"survival", dir.file("h.json", kHarmonic).string(), "--day", "1"}).code == 1);
  CHECK(run({"nonsense"}).code == 1);
  CHECK(run({}).code == 1);
}

TEST_CASE("errors from the modules carry their names") {
  TempDir dir;
  auto sched = dir.file("two.json", R"({"r":{"kind":"constant","value":1},"s":{"kind":"constant","value":2},)"
                                    R"("b":{"kind":"constant","value":2}})");
  auto r = run({"survival", sched.string(), "--day", "1", "--horizon", "10", "--mode", "paper"});
  CHECK(r.code == 1);
  CHECK(r.err.find("RestrictionViolated") != std::string::npos);

  auto limit = run({"construct", "--memory-b", "constant:0", "--steps", "40"});
  CHECK(limit.code == 2);
  CHECK(limit.err.find("LimitExceeded") != std::string::npos);
}

TEST_CASE("construct writes three files that round-trip byte for byte") {
  TempDir dir;
  auto out = dir.file("sep.json");
  auto r = run({"construct", "--memory-b", "constant:0", "--steps", "3", "-o", out.string()});
  REQUIRE(r.code == 0);
  auto summary = Json::parse(r.out);
  CHECK(summary["verification"]["under_c"]["kind"] == "RobinSurely");
  CHECK(summary["verification"]["under_b"]["kind"] == "SheriffAlmostSurely");

  const std::string text_b = slurp(out);
  auto sched_b = Json::parse(text_b);
  CHECK(sched_b["r"]["values"] == Json::array({"2", "6", "216"}));
  CHECK(sched_b["s"]["values"] == Json::array({"8", "216", "10077696"}));
  CHECK(sched_b["b"] == Json::parse(R"({"kind":"constant","value":0})"));
  CHECK(text_b == canonical_dump(to_json(parse_schedule(text_b))) + "\n");

  const auto under_c = dir.file("sep.c.json");
  const std::string text_c = slurp(under_c);
  CHECK(Json::parse(text_c)["b"]["value"] == 1);
  CHECK(text_c == canonical_dump(to_json(parse_schedule(text_c))) + "\n");

  auto cert = Json::parse(slurp(dir.file("sep.cert.json")));
  CHECK(cert["per_index"].size() == 3);

  // The written schedules classify the same way from disk.
  CHECK(Json::parse(run({"classify", out.string()}).out)["kind"] == "SheriffAlmostSurely");
  CHECK(Json::parse(run({"classify", under_c.string()}).out)["kind"] == "RobinSurely");
  CHECK(run({"validate", out.string()}).code == 0);

  auto to_stdout = run({"construct", "--memory-b", "constant:0", "--steps", "3"});
  CHECK(Json::parse(to_stdout.out)["schedule_b"]["r"]["values"][2] == "216");
}

TEST_CASE("construct accepts a memory spec file") {
  TempDir dir;
  auto memory = dir.file("b.json", R"({"kind":"constant","value":1})");
  auto r = run({"construct", "--memory-b", memory.string(), "--steps", "6"});
  CHECK(r.code == 0);
  auto stall = dir.file("stall.json", R"({"kind":"table","values":[0,1,1],"tail":{"kind":"constant","value":2}})");
  CHECK(run({"construct", "--memory-b", stall.string(), "--steps", "8"}).code == 2);
}

TEST_CASE("simulate emits a reproducible trace") {
  TempDir dir;
  auto sched = dir.file("h.json", kHarmonic);
  auto a = run({"simulate", sched.string(), "--nights", "30", "--strategy", "oldest-rnd", "--seed", "9", "--tag-day",
                "1", "--tag-day", "4"});
  auto b = run({"simulate", sched.string(), "--nights", "30", "--strategy", "oldest-rnd", "--seed", "9", "--tag-day",
                "1", "--tag-day", "4"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 31);

  auto file = dir.file("trace.jsonl");
  auto c = run({"simulate", sched.string(), "--nights", "30", "--seed", "9", "--tag-day", "1", "--tag-day", "4", "-o",
                file.string()});
  REQUIRE(c.code == 0);
  CHECK(slurp(file) == a.out);
  CHECK(Json::parse(c.out)["digest"].get<std::string>().size() == 64);

  auto mc = run({"simulate", sched.string(), "--nights", "1", "--tag-day", "1", "--trials", "20000"});
  REQUIRE(mc.code == 0);
  CHECK(std::stod(Json::parse(mc.out)["estimate"].get<std::string>()) == doctest::Approx(0.5).epsilon(0.05));
  CHECK(run({"simulate", sched.string(), "--nights", "5", "--strategy", "newest"}).code == 1);
}

TEST_CASE("compare reports a small z-score") {
  TempDir dir;
  auto sched = dir.file("h.json", kHarmonic);
  auto r = run({"compare", sched.string(), "--day", "1", "--nights", "9", "--trials", "20000", "--seed", "3"});
  REQUIRE(r.code == 0);
  auto j = Json::parse(r.out);
  CHECK(j["analytic"]["value"] == "1/10");
  CHECK(std::fabs(std::stod(j["z"].get<std::string>())) < 4.0);
}

TEST_CASE("seed comes from the environment when not given") {
  TempDir dir;
  auto sched = dir.file("h.json", kHarmonic);
  auto fixed = run({"simulate", sched.string(), "--nights", "20", "--seed", "42", "--tag-day", "1"});
  auto implicit = run({"simulate", sched.string(), "--nights", "20", "--tag-day", "1"});
  CHECK(fixed.out == implicit.out);
  ::setenv("RH_SEED", "7", 1);
  auto env = run({"simulate", sched.string(), "--nights", "20", "--tag-day", "1"});
  ::unsetenv("RH_SEED");
  auto seven = run({"simulate", sched.string(), "--nights", "20", "--seed", "7", "--tag-day", "1"});
  CHECK(env.out == seven.out);
  CHECK(env.out != fixed.out);
}

TEST_CASE("digit budget comes from the environment") {
  ::setenv("RH_DIGIT_BUDGET", "20", 1);
  auto r = run({"construct", "--memory-b", "constant:0", "--steps", "6"});
  ::unsetenv("RH_DIGIT_BUDGET");
  CHECK(r.code == 2);
  CHECK(r.err.find("LimitExceeded") != std::string::npos);
}
