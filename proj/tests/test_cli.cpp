#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aoi/rng.hpp"

namespace {

const std::string kCli = AOISCHED_CLI_PATH;

int run(const std::string& args, const std::string& stderr_file = "cli_err.txt") {
  std::string cmd = kCli + " " + args + " 2>" + stderr_file;
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path);
  f << body;
}

void write_identity_penalty(const std::string& path, int delta_max) {
  std::ofstream f(path);
  f << "delta,penalty\n";
  for (int d = 0; d <= delta_max; ++d) f << d << "," << d << "\n";
}

// time series with Y_t = V_{t-d} over a symmetric binary chain
void write_chain_csv(const std::string& path, double flip, int d, int n, std::uint64_t seed) {
  aoi::Rng rng(seed);
  std::vector<int> w(static_cast<std::size_t>(n + d));
  w[0] = rng.next_double() < 0.5 ? 0 : 1;
  for (std::size_t i = 1; i < w.size(); ++i)
    w[i] = rng.next_double() < flip ? 1 - w[i - 1] : w[i - 1];
  std::ofstream f(path);
  f << "t,y,v1\n";
  for (int t = 0; t < n; ++t)
    f << t << "," << w[static_cast<std::size_t>(t)] << "," << w[static_cast<std::size_t>(t + d)] << "\n";
}

std::vector<std::vector<std::string>> data_rows(const std::string& csv_text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(csv_text);
  std::string line;
  bool header = true;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace

TEST_CASE("gittins subcommand emits delta,gittins") {
  write_identity_penalty("cli_p.csv", 16);
  write_file("cli_g.json", R"({"penalty":"cli_p.csv","service":{"kind":"constant","t":1},"out":"cli_g.csv"})");
  CHECK(run("gittins cli_g.json") == 0);
  std::string out = slurp("cli_g.csv");
  CHECK(out.find("config_hash=") != std::string::npos);
  CHECK(out.find("delta,gittins") != std::string::npos);
  auto rows = data_rows(out);
  REQUIRE(rows.size() == 17);
  CHECK(rows[3][0] == "3");
  CHECK(std::stod(rows[3][1]) == doctest::Approx(4.0));  // gamma(delta) = delta + 1
}

TEST_CASE("threshold subcommand reports b* and the oracle gap") {
  write_identity_penalty("cli_p.csv", 16);
  write_file("cli_t.json",
             R"({"penalty":"cli_p.csv","service":{"kind":"constant","t":1},"buffer":2,"out":"cli_t.csv"})");
  CHECK(run("threshold cli_t.json --oracle") == 0);
  std::string out = slurp("cli_t.csv");
  CHECK(out.find("b,beta") != std::string::npos);
  CHECK(out.find("optimal b=0") != std::string::npos);
  auto rows = data_rows(out);
  REQUIRE(rows.size() == 2);
  CHECK(std::stod(rows[0][1]) == doctest::Approx(1.0).epsilon(1e-8));
  // oracle gap below 1e-6
  auto pos = out.find("oracle gain=");
  REQUIRE(pos != std::string::npos);
  auto dpos = out.find("delta=", pos);
  REQUIRE(dpos != std::string::npos);
  CHECK(std::stod(out.substr(dpos + 6)) < 1e-6);
}

TEST_CASE("whittle subcommand emits l,b,delta,whittle") {
  write_identity_penalty("cli_p.csv", 8);
  write_file("cli_w.json",
             R"({"arms":[{"penalty":"cli_p.csv","service":{"kind":"constant","t":1},"weight":1.0,"buffer":2}],)"
             R"("out":"cli_w.csv"})");
  CHECK(run("whittle cli_w.json") == 0);
  auto rows = data_rows(slurp("cli_w.csv"));
  REQUIRE(rows.size() == 2 * 9);
  // W_{0,0}(3) = 3*p(4) - (p(1)+p(2)+p(3)) = 6
  bool found = false;
  for (const auto& r : rows)
    if (r[0] == "0" && r[1] == "0" && r[2] == "3") {
      CHECK(std::stod(r[3]) == doctest::Approx(6.0).epsilon(1e-9));
      found = true;
    }
  CHECK(found);
}

TEST_CASE("metrics subcommand on a delayed-system fixture") {
  write_chain_csv("cli_ts.csv", 0.1, 2, 4000, 99);
  write_file("cli_m.json",
             R"({"timeseries":"cli_ts.csv","loss":{"family":"zero_one"},"theta_max":4,"out":"cli_m.csv"})");
  CHECK(run("metrics cli_m.json") == 0);
  auto rows = data_rows(slurp("cli_m.csv"));
  REQUIRE(rows.size() == 5);
  // row theta=2 has value exactly 0 and a strongly positive eps-Markov flag
  CHECK(std::stod(rows[2][1]) == 0.0);
  CHECK(std::stod(rows[1][4]) > 0.2);
  // identity value == g1 - g2 on every row
  for (const auto& r : rows)
    CHECK(std::stod(r[1]) == doctest::Approx(std::stod(r[2]) - std::stod(r[3])).epsilon(1e-9));
}

TEST_CASE("metrics penalty_out feeds the threshold command") {
  write_chain_csv("cli_ts3.csv", 0.1, 2, 4000, 99);
  write_file("cli_m3.json",
             R"({"timeseries":"cli_ts3.csv","loss":{"family":"zero_one"},"theta_max":6,)"
             R"("out":"cli_m3.csv","penalty_out":"cli_m3_penalty.csv"})");
  CHECK(run("metrics cli_m3.json") == 0);
  // the emitted table is a valid penalty curve whose dip at delta = 2 makes
  // the one-step-stale feature the optimal submission
  write_file("cli_t3.json",
             R"({"penalty":"cli_m3_penalty.csv","service":{"kind":"constant","t":1},"buffer":4,"out":"cli_t3.csv"})");
  CHECK(run("threshold cli_t3.json") == 0);
  std::string out = slurp("cli_t3.csv");
  CHECK(out.find("optimal b=1") != std::string::npos);
}

TEST_CASE("metrics with a separate training dataset emits the cross-entropy curve") {
  write_chain_csv("cli_tr_train.csv", 0.1, 1, 6000, 5);
  write_chain_csv("cli_tr_infer.csv", 0.1, 1, 6000, 6);
  write_file("cli_m4.json",
             R"({"timeseries":"cli_tr_infer.csv","train_timeseries":"cli_tr_train.csv",)"
             R"("loss":{"family":"brier"},"theta_max":3,"out":"cli_m4.csv"})");
  CHECK(run("metrics cli_m4.json") == 0);
  auto rows = data_rows(slurp("cli_m4.csv"));
  REQUIRE(rows.size() == 4);
  // cross entropy dominates the direct conditional entropy g1 - g2
  for (const auto& r : rows)
    CHECK(std::stod(r[1]) >= std::stod(r[2]) - std::stod(r[3]) - 0.05);
}

TEST_CASE("metrics value column is nondecreasing on a markov fixture") {
  write_chain_csv("cli_ts2.csv", 0.1, 0, 60000, 7);
  write_file("cli_m2.json",
             R"({"timeseries":"cli_ts2.csv","loss":{"family":"log"},"theta_max":4,"out":"cli_m2.csv"})");
  CHECK(run("metrics cli_m2.json") == 0);
  auto rows = data_rows(slurp("cli_m2.csv"));
  REQUIRE(rows.size() == 5);
  for (std::size_t i = 1; i < rows.size(); ++i)
    CHECK(std::stod(rows[i][1]) >= std::stod(rows[i - 1][1]) - 1e-9);
}

TEST_CASE("simulate subcommand is byte-stable and sweeps emit one row per point") {
  write_identity_penalty("cli_p.csv", 16);
  write_file("cli_s.json", R"({
    "mode": "single", "horizon": 20000, "warmup": 500, "seed": 5, "replications": 3,
    "sources": [{"penalty": "cli_p.csv", "service": {"kind": "geometric", "q": 0.5, "t_max": 12}, "buffer": 1}],
    "policies": ["zero_wait", "gaw_optimal"],
    "out": "cli_s.csv"})");
  CHECK(run("simulate cli_s.json") == 0);
  std::string first = slurp("cli_s.csv");
  CHECK(run("simulate cli_s.json") == 0);
  CHECK(first == slurp("cli_s.csv"));
  CHECK(first.find("policy,source,metric,value,stderr") != std::string::npos);

  // different seed changes the bytes
  CHECK(run("simulate cli_s.json --seed 77 --out cli_s2.csv") == 0);
  CHECK(first != slurp("cli_s2.csv"));

  write_file("cli_sw.json", R"({
    "mode": "single", "horizon": 5000, "warmup": 200, "seed": 5, "replications": 2,
    "sources": [{"penalty": "cli_p.csv", "service": {"kind": "lognormal", "alpha": 1.2, "sigma": 0.5, "t_max": 128}, "buffer": 1}],
    "policies": ["zero_wait"],
    "sweep": {"parameter": "sigma", "values": [0.0, 0.5]},
    "out": "cli_sw.csv"})");
  CHECK(run("simulate cli_sw.json") == 0);
  std::string sweep = slurp("cli_sw.csv");
  CHECK(sweep.find("avg_error[sigma=0]") != std::string::npos);
  CHECK(sweep.find("avg_error[sigma=0.5]") != std::string::npos);
}

TEST_CASE("simulate trace output") {
  write_identity_penalty("cli_p.csv", 16);
  write_file("cli_tr.json", R"({
    "mode": "single", "horizon": 200, "warmup": 0, "seed": 3, "replications": 1,
    "sources": [{"penalty": "cli_p.csv", "service": {"kind": "constant", "t": 2}, "buffer": 1}],
    "policies": ["zero_wait"],
    "trace": "cli_trace.csv", "trace_limit": 50,
    "out": "cli_tr.csv"})");
  CHECK(run("simulate cli_tr.json") == 0);
  auto rows = data_rows(slurp("cli_trace.csv"));
  REQUIRE(rows.size() == 50);
  // per-slot rows: t column counts up from 0
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i][0] == std::to_string(i));

  // trace does not combine with sweeps
  write_file("cli_tr2.json", R"({
    "mode": "single", "horizon": 200, "warmup": 0, "seed": 3, "replications": 1,
    "sources": [{"penalty": "cli_p.csv", "service": {"kind": "lognormal", "alpha": 1.2, "sigma": 0.3, "t_max": 64}, "buffer": 1}],
    "policies": ["zero_wait"],
    "sweep": {"parameter": "sigma", "values": [0.0, 0.3]},
    "trace": "cli_trace2.csv",
    "out": "cli_tr2.csv"})");
  CHECK(run("simulate cli_tr2.json") == 2);
}

TEST_CASE("error handling and exit codes") {
  // malformed penalty CSV -> input error, exit 2
  write_file("cli_bad.csv", "delta,penalty\n1,4\n");
  write_file("cli_b.json", R"({"penalty":"cli_bad.csv","service":{"kind":"constant","t":1},"buffer":1})");
  CHECK(run("threshold cli_b.json") == 2);

  // missing file names the path on stderr
  write_file("cli_miss.json", R"({"penalty":"no_such_file.csv","service":{"kind":"constant","t":1},"buffer":1})");
  CHECK(run("threshold cli_miss.json", "cli_err2.txt") == 2);
  CHECK(slurp("cli_err2.txt").find("no_such_file.csv") != std::string::npos);

  // unknown config keys are rejected
  write_identity_penalty("cli_p.csv", 8);
  write_file("cli_u.json",
             R"({"penalty":"cli_p.csv","service":{"kind":"constant","t":1},"buffer":1,"zzz":1})");
  CHECK(run("threshold cli_u.json") == 2);

  // missing config file
  CHECK(run("gittins nonexistent.json") == 2);
}
