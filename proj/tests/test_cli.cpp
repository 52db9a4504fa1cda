#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "lagflow/cli.hpp"

namespace fs = std::filesystem;
using namespace lagflow::cli;

namespace {

struct Csv {
  std::map<std::string, std::string> header;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw std::runtime_error("no column " + name);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Csv read_csv(const fs::path& p) {
  Csv csv;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find(" = ");
      if (eq != std::string::npos) csv.header[line.substr(2, eq - 2)] = line.substr(eq + 3);
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (csv.columns.empty()) {
      csv.columns = cells;
    } else {
      std::vector<double> row;
      for (const auto& c : cells) row.push_back(std::stod(c));
      csv.rows.push_back(row);
    }
  }
  return csv;
}

const fs::path kScratchRoot = fs::temp_directory_path() / ("lagflow_cli_" + std::to_string(::getpid()));

struct ScratchCleanup {
  ~ScratchCleanup() {
    std::error_code ec;
    fs::remove_all(kScratchRoot, ec);
  }
} cleanup;

fs::path scratch(const std::string& name) {
  const auto dir = kScratchRoot / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string binary() {
  const char* bin = std::getenv("LAGFLOW_BIN");
  REQUIRE_MESSAGE(bin != nullptr, "LAGFLOW_BIN not set");
  return bin;
}

int invoke(const std::string& args) {
  const std::string cmd = binary() + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST_CASE("settings") {
  RunConfig cfg;
  apply_setting(cfg, " alpha ", " 0.75 ");
  apply_setting(cfg, "K", "40");
  apply_setting(cfg, "cells", "25, 50,100");
  CHECK(*cfg.alpha == 0.75);
  CHECK(*cfg.cells == 40);
  CHECK(*cfg.cell_list == std::vector<std::size_t>{25, 50, 100});

  CHECK_THROWS_AS(apply_setting(cfg, "beta", "1"), ConfigError);
  CHECK_THROWS_AS(apply_setting(cfg, "alpha", "abc"), ConfigError);
  CHECK_THROWS_AS(apply_setting(cfg, "alpha", "1.0x"), ConfigError);
  CHECK_THROWS_AS(apply_setting(cfg, "tau", "nan"), ConfigError);
  CHECK_THROWS_AS(apply_setting(cfg, "K", "0"), ConfigError);
  CHECK_THROWS_AS(apply_setting(cfg, "K", "2.5"), ConfigError);
  CHECK_THROWS_AS(apply_setting(cfg, "stride", ""), ConfigError);
}

TEST_CASE("config text") {
  RunConfig cfg;
  parse_config_text(cfg, "# experiment\ncommand = evolve\n\nlambda = 2   # confined\nt_end=0.5\n");
  CHECK(*cfg.command == "evolve");
  CHECK(*cfg.lambda == 2.0);
  CHECK(*cfg.t_end == 0.5);
  CHECK_THROWS_AS(parse_config_text(cfg, "lambda 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text(cfg, "gamma = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_file(cfg, "/nonexistent/lagflow.cfg"), ConfigError);
}

TEST_CASE("resolution and validation") {
  RunConfig cfg;
  CHECK_THROWS_AS(resolve(cfg), ConfigError);
  cfg.command = "exp1";
  const auto r = resolve(cfg);
  CHECK(r.alpha == 1.0);
  CHECK(r.lambda == 5.0);
  CHECK(r.cells == 50);
  CHECK(r.tau == 1e-3);
  CHECK(r.t_end == 0.8);
  CHECK(r.initial == "sine");
  CHECK(r.stride == 10);

  RunConfig e2;
  e2.command = "exp2";
  const auto r2 = resolve(e2);
  CHECK(r2.lambda == 0.0);
  CHECK(r2.initial == "barenblatt");
  CHECK(r2.s_end == 100.0);
  e2.lambda = 1.0;
  CHECK_THROWS_AS(resolve(e2), ConfigError);

  auto bad = [](auto edit) {
    RunConfig c;
    c.command = "evolve";
    edit(c);
    return c;
  };
  CHECK_THROWS_AS(resolve(bad([](RunConfig& c) { c.command = "plot"; })), ConfigError);
  CHECK_THROWS_AS(resolve(bad([](RunConfig& c) { c.alpha = 0.4; })), ConfigError);
  CHECK_THROWS_AS(resolve(bad([](RunConfig& c) { c.alpha = 1.1; })), ConfigError);
  CHECK_THROWS_AS(resolve(bad([](RunConfig& c) { c.lambda = -1.0; })), ConfigError);
  CHECK_THROWS_AS(resolve(bad([](RunConfig& c) { c.tau = 0.0; })), ConfigError);
  CHECK_THROWS_AS(resolve(bad([](RunConfig& c) { c.t_end = -1.0; })), ConfigError);
  CHECK_THROWS_AS(resolve(bad([](RunConfig& c) { c.initial = "gauss"; })), ConfigError);
  CHECK_THROWS_AS(resolve(bad([](RunConfig& c) { c.grid = "nonuniform:"; })), ConfigError);
  CHECK_THROWS_AS(resolve(bad([](RunConfig& c) {
                    c.command = "minimizer";
                    c.lambda = 0.0;
                  })),
                  ConfigError);
}

TEST_CASE("evolve with no time steps writes the initial snapshot") {
  RunConfig cfg;
  cfg.command = "evolve";
  cfg.t_end = 0.0;
  cfg.cells = 8;
  cfg.output = scratch("empty").string();
  std::ostringstream log;
  CHECK(run(resolve(cfg), log) == kSuccess);
  const auto snaps = read_csv(fs::path(*cfg.output) / "snapshots.csv");
  REQUIRE(snaps.rows.size() == 1);
  CHECK(snaps.rows[0][0] == 0.0);
  CHECK(snaps.columns.size() == 10);
  CHECK(read_csv(fs::path(*cfg.output) / "timeseries.csv").rows.size() == 1);
}

TEST_CASE("initial positions and grids from files") {
  const auto dir = scratch("files");
  write_file(dir / "x.txt", "-1, -0.25\n0.5 # middle\n1.5\n");
  write_file(dir / "grid.txt", "0 0.2 0.6 1\n");
  RunConfig cfg;
  cfg.command = "evolve";
  cfg.initial = "file:" + (dir / "x.txt").string();
  cfg.grid = "nonuniform:" + (dir / "grid.txt").string();
  cfg.t_end = 0.01;
  cfg.output = (dir / "out").string();
  std::ostringstream log;
  CHECK(run(resolve(cfg), log) == kSuccess);
  const auto snaps = read_csv(dir / "out" / "snapshots.csv");
  CHECK(snaps.rows.front()[1] == -1.0);
  CHECK(snaps.rows.front()[4] == 1.5);

  cfg.initial = "file:" + (dir / "missing.txt").string();
  CHECK(run(resolve(cfg), log) == kConfigError);
  write_file(dir / "y.txt", "0 1 0.5 2\n");
  cfg.initial = "file:" + (dir / "y.txt").string();
  CHECK(run(resolve(cfg), log) == kConfigError);
}

TEST_CASE("exit codes of the executable") {
  const auto dir = scratch("codes");
  CHECK(invoke("evolve -K 4 --t-end 0.002 -o " + (dir / "ok").string()) == kSuccess);
  CHECK(invoke("evolve --bogus 1") == kConfigError);
  CHECK(invoke("wander -o " + (dir / "x").string()) == kConfigError);
  CHECK(invoke("evolve --alpha 2 -o " + (dir / "x").string()) == kConfigError);
  CHECK(invoke("evolve -c " + (dir / "none.cfg").string()) == kConfigError);
  write_file(dir / "unknown.cfg", "command = evolve\nspeed = 3\n");
  CHECK(invoke("-c " + (dir / "unknown.cfg").string()) == kConfigError);
  // pressure overflows on a degenerate cell
  write_file(dir / "crushed.txt", "0 1e-300 1\n");
  CHECK(invoke("evolve -K 2 --t-end 0.01 --initial file:" + (dir / "crushed.txt").string() + " -o " +
               (dir / "c").string()) == kSolverFailure);
}

TEST_CASE("flags override the config file") {
  const auto dir = scratch("override");
  write_file(dir / "run.cfg", "command = evolve\nK = 10\nt_end = 0.004\nlambda = 1\noutput = " +
                                  (dir / "from_file").string() + "\n");
  REQUIRE(invoke("-c " + (dir / "run.cfg").string()) == kSuccess);
  CHECK(read_csv(dir / "from_file" / "timeseries.csv").header.at("K") == "10");
  REQUIRE(invoke("-c " + (dir / "run.cfg").string() + " -K 12 --lambda 2 -o " + (dir / "flags").string()) ==
          kSuccess);
  const auto csv = read_csv(dir / "flags" / "timeseries.csv");
  CHECK(csv.header.at("K") == "12");
  CHECK(csv.header.at("lambda") == "2");
  CHECK(csv.header.at("t_end") == read_csv(dir / "from_file" / "timeseries.csv").header.at("t_end"));
}

TEST_CASE("first experiment time series") {
  const auto dir = scratch("exp1");
  REQUIRE(invoke("exp1 -o " + dir.string()) == kSuccess);
  const auto ts = read_csv(dir / "timeseries.csv");
  CHECK(ts.header.at("tau") == "0.001");
  CHECK(ts.header.count("rate_2lambda_over_1_plus_lambda_tau") == 1);
  CHECK(ts.header.count("a_tau") == 1);
  CHECK(ts.header.count("b_tau") == 1);
  CHECK(ts.header.count("crossover_time") == 1);
  REQUIRE(ts.rows.size() == 801);
  const std::size_t t = ts.column("t"), gap = ts.column("H_gap");
  const double g0 = ts.rows[0][gap], rate = 10.0 / 1.005;
  for (std::size_t n = 1; n < ts.rows.size(); ++n) {
    CHECK(ts.rows[n][gap] < ts.rows[n - 1][gap]);
    CHECK(ts.rows[n][gap] <= g0 * std::exp(-rate * ts.rows[n][t]) + 1e-10 * g0);
  }
  const auto snaps = read_csv(dir / "snapshots.csv");
  CHECK(snaps.rows.size() == 81);
  CHECK(snaps.rows.back()[0] == doctest::Approx(0.8));
}

TEST_CASE("second experiment snapshot rows") {
  const auto dir = scratch("exp2");
  REQUIRE(invoke("exp2 -o " + dir.string()) == kSuccess);
  const auto ss = read_csv(dir / "selfsim.csv");
  REQUIRE(ss.columns == std::vector<std::string>{"n", "t_hat", "S", "max_coord_dev", "L1_dev", "R_delta"});
  REQUIRE(ss.rows.size() == 5);
  const double targets[] = {0.0, 0.1, 1.0, 10.0, 100.0};
  const auto& first = ss.rows.front();
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& row = ss.rows[i];
    CHECK(row[1] <= targets[i] * (1.0 + 1e-12));
    CHECK(row[1] >= 0.95 * targets[i]);
    CHECK(row[3] <= 1e-8 * row[2] * 2.0);
    CHECK(row[4] <= 3.0 * first[4]);
  }
}

TEST_CASE("identical configurations give identical files") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (const auto& cmd : {std::string("exp1 --t-end 0.2"), std::string("exp2 --s-end 1"),
                          std::string("converge --cells 25,50 --lambda 5"), std::string("minimizer -K 30")}) {
    REQUIRE(invoke(cmd + " -o " + a.string()) == kSuccess);
    REQUIRE(invoke(cmd + " -o " + b.string()) == kSuccess);
    for (const auto& entry : fs::directory_iterator(a)) {
      INFO(cmd, " ", entry.path().filename().string());
      CHECK(slurp(entry.path()) == slurp(b / entry.path().filename()));
    }
  }
}
