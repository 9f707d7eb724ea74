#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "nplab/cli.hpp"
#include "nplab/errors.hpp"

namespace fs = std::filesystem;
using namespace nplab;
using nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string output;
};

// Runs the CLI with stdout and stderr merged.
Result run_cli(const std::string& args) {
  const std::string cmd = std::string(NPLAB_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("nplab-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> files_in(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
  return out;
}

fs::path only(const fs::path& dir, const std::string& suffix) {
  fs::path found;
  int count = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0 &&
        (suffix == ".manifest.json" || name.find(".manifest.json") == std::string::npos)) {
      found = e.path();
      ++count;
    }
  }
  REQUIRE(count == 1);
  return found;
}

std::vector<std::vector<double>> read_csv(const fs::path& p, std::string& header) {
  std::ifstream in(p);
  std::getline(in, header);
  std::vector<std::vector<double>> rows;
  for (std::string line; std::getline(in, line);) {
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

std::string out_flag(const fs::path& dir) { return " --output " + dir.string(); }

}  // namespace

TEST_CASE("npcheck example") {
  const auto dir = fresh_dir("npcheck");
  const auto r = run_cli("npcheck --spec dirichlet:1 --degree 200 --exact" + out_flag(dir));
  REQUIRE(r.code == 0);
  const auto j = json::parse(slurp(only(dir, ".json")));
  CHECK(j["status"] == "certified");
  CHECK(j["degree"] == 200);
  CHECK(j["mode"] == "exact");
  const auto m = json::parse(slurp(only(dir, ".manifest.json")));
  CHECK(m["tool"] == "nplab");
  CHECK(m["version"] == cli::kVersion);
  CHECK(m["config"]["N"] == 200);
  CHECK(m.contains("tolerances"));
  CHECK(m["outputs"].size() == 1);
  const auto refuted = fresh_dir("npcheck-refuted");
  const auto coeffs = fresh_dir("npcheck-coeffs") / "linear.csv";
  std::ofstream(coeffs) << "# a_n = n + 1\n0,1,1\n1,2,1\n2,3,1\n3,4,1\n";
  REQUIRE(run_cli("npcheck --spec file:" + coeffs.string() + " --degree 3 --exact" + out_flag(refuted)).code == 0);
  CHECK(json::parse(slurp(only(refuted, ".manifest.json")))["config"].contains("specFileDigest"));
  const auto jr = json::parse(slurp(only(refuted, ".json")));
  CHECK(jr["status"] == "refuted");
  CHECK(jr["firstNegativeIndex"] == 2);
}

TEST_CASE("ratio-scan example trends to 3/4") {
  const auto dir = fresh_dir("ratio");
  const auto r = run_cli("ratio-scan --spec dirichlet:2 --d 1 --point-zero 1 --direction -1 --tmax 0.95" + out_flag(dir));
  REQUIRE(r.code == 0);
  std::string header;
  const auto rows = read_csv(only(dir, ".csv"), header);
  CHECK(header == "t,ratio,tail_bound");
  REQUIRE(rows.size() == 21);
  CHECK(rows.back()[0] == doctest::Approx(0.95));
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][1] > rows[i - 1][1]);
  CHECK(std::abs(rows.back()[1] - 0.75) < 0.05);
  const auto m = json::parse(slurp(only(dir, ".manifest.json")));
  const double cf = m["results"]["closedFormAtTmax"];
  CHECK(std::abs(rows.back()[1] - cf) < 0.02);
  CHECK(m["tailBounds"].contains("maxRelativeKernelTail"));
  CHECK(m["tailBounds"].contains("pointZeroKernelTail"));
  CHECK(m["tolerances"].contains("radialTail"));
}

TEST_CASE("inner example has sigma = t") {
  const auto dir = fresh_dir("inner");
  const auto r = run_cli("inner --spec szego --d 2 --generators \"z1,z2\" --N 8 --scan-direction \"0.6,0.8\"" + out_flag(dir));
  REQUIRE(r.code == 0);
  std::string header;
  const auto rows = read_csv(only(dir, ".csv"), header);
  CHECK(header == "t,sigma_1,tail_bound");
  REQUIRE(rows.size() == 21);
  for (const auto& row : rows) CHECK(std::abs(row[1] - row[0]) < 1e-12);
}

TEST_CASE("inner summary and matrix") {
  const auto dir = fresh_dir("inner-files");
  REQUIRE(run_cli("inner --spec szego --d 2 --generators \"z1,z2\" --N 4 --scan-direction \"1,0\"" + out_flag(dir)).code == 0);
  std::vector<fs::path> jsons;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.ends_with(".json") && !name.ends_with(".manifest.json")) jsons.push_back(e.path());
  }
  REQUIRE(jsons.size() == 1);
  const auto j = json::parse(slurp(jsons[0]));
  CHECK(j["dimE"] == 2);
  CHECK(j["fiberDim"] == 1);
  CHECK(slurp(only(dir, ".matrix")).rfind("nplab-matrix 1\nrows 15 cols 15\n", 0) == 0);
}

TEST_CASE("other commands") {
  SUBCASE("series") {
    const auto dir = fresh_dir("series");
    REQUIRE(run_cli("series --spec dirichlet:1 --N 5 --exact" + out_flag(dir)).code == 0);
    const auto text = slurp(only(dir, ".csv"));
    CHECK(text.rfind("n,a,b\n0,1,0\n1,1/2,1/2\n2,1/3,1/12\n", 0) == 0);
  }
  SUBCASE("extremal") {
    const auto dir = fresh_dir("extremal");
    REQUIRE(run_cli("extremal --spec szego --d 1 --generators \"z - 1/2\" --N 40" + out_flag(dir)).code == 0);
    std::vector<fs::path> jsons;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (!e.path().filename().string().ends_with(".manifest.json")) jsons.push_back(e.path());
    }
    REQUIRE(jsons.size() == 1);
    const auto j = json::parse(slurp(jsons[0]));
    // The extremal function is -b, whose value at 0 is 1/2.
    CHECK(double(j["valueAtZero"]) == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(double(j["norm"]) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("curvature") {
    const auto dir = fresh_dir("curvature");
    REQUIRE(run_cli("curvature --spec szego --d 2 --generators \"z1,z2\" --N 6 --samples 1000" + out_flag(dir)).code == 0);
    std::vector<fs::path> jsons;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (!e.path().filename().string().ends_with(".manifest.json")) jsons.push_back(e.path());
    }
    REQUIRE(jsons.size() == 1);
    const auto j = json::parse(slurp(jsons[0]));
    CHECK(j["candidate"] == 0);
    CHECK(double(j["residual"]) <= 0.05);
    CHECK(j["tGrid"].size() == 3);
  }
  SUBCASE("conjecture45") {
    const auto dir = fresh_dir("conj");
    REQUIRE(run_cli("conjecture45 --trials 5 --horizon 500" + out_flag(dir)).code == 0);
    std::vector<fs::path> jsons;
    for (const auto& e : fs::directory_iterator(dir)) {
      const auto name = e.path().filename().string();
      if (name.ends_with(".json") && !name.ends_with(".manifest.json")) jsons.push_back(e.path());
    }
    REQUIRE(jsons.size() == 1);
    const auto j = json::parse(slurp(jsons[0]));
    CHECK(double(j["maxDeviation"]) < 1e-3);
    const auto alpha2 = fresh_dir("conj-alpha2");
    REQUIRE(run_cli("conjecture45 --spec dirichlet:2 --trials 2" + out_flag(alpha2)).code == 0);
    for (const auto& e : fs::directory_iterator(alpha2)) {
      const auto name = e.path().filename().string();
      if (name.ends_with(".json") && !name.ends_with(".manifest.json")) {
        const auto k = json::parse(slurp(e.path()));
        CHECK(k["insideHypothesis"] == false);
        CHECK(k["sumEqualsOne"] == "violated");
      }
    }
  }
}

TEST_CASE("outputs are deterministic") {
  const std::string args = "curvature --spec szego --d 2 --generators \"z1^2, z2\" --N 6 --samples 500 --seed 9";
  const auto a = fresh_dir("det-a");
  const auto b = fresh_dir("det-b");
  REQUIRE(run_cli(args + out_flag(a)).code == 0);
  REQUIRE(run_cli(args + out_flag(b)).code == 0);
  const auto fa = files_in(a);
  CHECK(fa.size() == 2);
  CHECK(fa == files_in(b));
  const auto c = fresh_dir("det-c");
  REQUIRE(run_cli("curvature --spec szego --d 2 --generators \"z1^2, z2\" --N 6 --samples 500 --seed 10" + out_flag(c)).code == 0);
  CHECK(files_in(c).begin()->first != fa.begin()->first);
}

TEST_CASE("job files and flag overrides") {
  const auto dir = fresh_dir("job");
  const fs::path job = dir / "job.json";
  std::ofstream(job) << "{\n  \"command\": \"series\",\n  \"spec\": \"dirichlet:1\",\n  \"N\": 4\n}\n";
  const auto out1 = dir / "a";
  fs::create_directories(out1);
  REQUIRE(run_cli("--job " + job.string() + out_flag(out1)).code == 0);
  CHECK(json::parse(slurp(only(out1, ".manifest.json")))["config"]["N"] == 4);
  const auto out2 = dir / "b";
  fs::create_directories(out2);
  REQUIRE(run_cli("--job " + job.string() + " --N 7" + out_flag(out2)).code == 0);
  CHECK(json::parse(slurp(only(out2, ".manifest.json")))["config"]["N"] == 7);
}

TEST_CASE("validation errors exit 1") {
  const auto dir = fresh_dir("errors");
  SUBCASE("unknown key") {
    const fs::path job = dir / "job.json";
    std::ofstream(job) << "{\"command\": \"series\", \"colour\": 3}";
    const auto r = run_cli("--job " + job.string() + out_flag(dir));
    CHECK(r.code == 1);
    CHECK(r.output.find("colour") != std::string::npos);
  }
  SUBCASE("syntax error names the line") {
    const fs::path job = dir / "job.json";
    std::ofstream(job) << "{\n\"command\": \"series\",\n\"N\": ,\n}";
    const auto r = run_cli("--job " + job.string() + out_flag(dir));
    CHECK(r.code == 1);
    CHECK(r.output.find("line 3") != std::string::npos);
  }
  SUBCASE("bad fields") {
    CHECK(run_cli("series --d 0" + out_flag(dir)).code == 1);
    CHECK(run_cli("bogus" + out_flag(dir)).code == 1);
    CHECK(run_cli("series --spec dirichlet:x" + out_flag(dir)).code == 1);
    const auto r = run_cli("extremal --d 2 --generators \"z1 + z3\"" + out_flag(dir));
    CHECK(r.code == 1);
    CHECK(r.output.find("z3") != std::string::npos);
    CHECK(run_cli("ratio-scan --d 1 --point-zero 2 --direction 1" + out_flag(dir)).code == 1);
    CHECK(run_cli("inner --spec dirichlet:-1 --generators z" + out_flag(dir)).code == 1);
  }
}

TEST_CASE("numerical contract violations exit 2") {
  const auto dir = fresh_dir("contract");
  const auto r = run_cli("inner --spec dirichlet:2 --point-zero 1 --direction -1 --N 100" + out_flag(dir));
  CHECK(r.code == 2);
  CHECK(r.output.find("eigenvalue") != std::string::npos);
  CHECK(r.output.find("-0.000168596") != std::string::npos);
}

TEST_CASE("config helpers") {
  CHECK(cli::parse_complex("0.6") == std::complex<double>(0.6, 0.0));
  CHECK(cli::parse_complex("2i") == std::complex<double>(0.0, 2.0));
  CHECK(cli::parse_complex("1-2i") == std::complex<double>(1.0, -2.0));
  CHECK(cli::parse_complex(" -i ") == std::complex<double>(0.0, -1.0));
  CHECK(cli::parse_complex("1e-3+1.5e2i") == std::complex<double>(1e-3, 150.0));
  CHECK_THROWS_AS(cli::parse_complex("1+"), ValidationError);
  CHECK_THROWS_AS(cli::parse_complex(""), ValidationError);

  CHECK(cli::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(cli::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);

  cli::JobConfig cfg;
  cfg.command = "ratio-scan";
  cfg.point_zero = {"1"};
  cfg.direction = {"-1"};
  cfg.spec = "dirichlet:2";
  cli::validate(cfg);
  REQUIRE(cfg.N);
  CHECK(*cfg.N > 500);
  CHECK(cfg.t_grid.size() == 21);
  CHECK(cfg.t_grid.back() == 0.95);
  const auto stem = cli::artifact_stem(cfg);
  CHECK(stem.rfind("ratio-scan-", 0) == 0);
  CHECK(stem.size() == std::string("ratio-scan-").size() + 16);
  auto moved = cfg;
  moved.output = "/somewhere/else";
  CHECK(cli::artifact_stem(moved) == stem);
  auto other = cfg;
  other.seed = 2;
  CHECK(cli::artifact_stem(other) != stem);
  CHECK(cli::canonical_json(cfg) == cli::canonical_json(moved));

  cli::JobConfig curv;
  curv.command = "curvature";
  curv.d = 2;
  curv.generators = {"z1", "z2"};
  cli::validate(curv);
  CHECK(curv.t_grid == std::vector<double>{0.9, 0.95, 0.99});
  CHECK(*curv.N == 30);

  cli::JobConfig both = curv;
  both.point_zero = {"0", "0"};
  CHECK_THROWS_AS(cli::validate(both), ValidationError);

  const auto parsed = cli::parse_job_json("{\"command\": \"npcheck\", \"spec\": \"dirichlet:1/2\", \"exact\": true}");
  CHECK(parsed.command == "npcheck");
  CHECK(parsed.exact);
  CHECK_THROWS_AS(cli::parse_job_json("{\"command\": 3}"), ValidationError);
  CHECK_THROWS_AS(cli::parse_job_json("[1]"), ValidationError);
}

TEST_CASE("random unit-mass b") {
  std::mt19937_64 rng(4);
  for (int j = 0; j < 50; ++j) {
    const auto b = cli::random_unit_mass_b(rng);
    double sum = 0.0;
    for (std::size_t n = 0; n < b.size(); ++n) {
      CHECK(b.value(n) >= 0.0);
      sum += b.value(n);
    }
    CHECK(b.value(0) == 0.0);
    CHECK(b.value(1) >= 0.1);
    CHECK(b.size() <= 9);
    CHECK(std::abs(sum - 1.0) < 1e-15);
  }
}
