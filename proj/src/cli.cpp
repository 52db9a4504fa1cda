#include "lagflow/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "lagflow/equilibria.hpp"
#include "lagflow/functionals.hpp"
#include "lagflow/io.hpp"
#include "lagflow/rescaling.hpp"
#include "lagflow/stepper.hpp"

namespace lagflow::cli {

namespace {

const std::array<std::string, 5> kCommands{"evolve", "exp1", "exp2", "minimizer", "converge"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size() || !std::isfinite(v))
    throw ConfigError(fmt::format("{}: '{}' is not a finite number", key, value));
  return v;
}

std::size_t parse_count(const std::string& key, const std::string& value) {
  const double v = parse_real(key, value);
  if (v < 1.0 || v != std::floor(v) || v > 1e9)
    throw ConfigError(fmt::format("{}: '{}' is not a positive integer", key, value));
  return static_cast<std::size_t>(v);
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key), value = trim(raw_value);
  if (value.empty()) throw ConfigError(fmt::format("{}: empty value", key));
  if (key == "command") {
    cfg.command = value;
  } else if (key == "alpha") {
    cfg.alpha = parse_real(key, value);
  } else if (key == "lambda") {
    cfg.lambda = parse_real(key, value);
  } else if (key == "K") {
    cfg.cells = parse_count(key, value);
  } else if (key == "tau") {
    cfg.tau = parse_real(key, value);
  } else if (key == "t_end") {
    cfg.t_end = parse_real(key, value);
  } else if (key == "s_end") {
    cfg.s_end = parse_real(key, value);
  } else if (key == "initial") {
    cfg.initial = value;
  } else if (key == "grid") {
    cfg.grid = value;
  } else if (key == "output") {
    cfg.output = value;
  } else if (key == "stride") {
    cfg.stride = parse_count(key, value);
  } else if (key == "cells") {
    std::vector<std::size_t> list;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) list.push_back(parse_count(key, trim(item)));
    if (list.empty()) throw ConfigError("cells: empty list");
    cfg.cell_list = std::move(list);
  } else {
    throw ConfigError(fmt::format("unknown key '{}'", key));
  }
}

void parse_config_text(RunConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected 'key = value'", lineno));
    try {
      apply_setting(cfg, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", lineno, e.what()));
    }
  }
}

void parse_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  parse_config_text(cfg, buf.str());
}

ResolvedConfig resolve(const RunConfig& cfg) {
  if (!cfg.command) throw ConfigError("no command given");
  ResolvedConfig r;
  r.command = *cfg.command;
  if (std::find(kCommands.begin(), kCommands.end(), r.command) == kCommands.end())
    throw ConfigError(fmt::format("unknown command '{}'", r.command));

  if (r.command == "exp2") {
    r.lambda = 0.0;
    r.initial = "barenblatt";
  }
  r.alpha = cfg.alpha.value_or(r.alpha);
  r.lambda = cfg.lambda.value_or(r.lambda);
  r.cells = cfg.cells.value_or(r.cells);
  r.tau = cfg.tau.value_or(r.tau);
  r.t_end = cfg.t_end.value_or(r.t_end);
  r.s_end = cfg.s_end.value_or(r.s_end);
  r.initial = cfg.initial.value_or(r.initial);
  r.grid = cfg.grid.value_or(r.grid);
  r.output = cfg.output.value_or(r.output);
  r.stride = cfg.stride.value_or(r.stride);
  r.cell_list = cfg.cell_list.value_or(r.cell_list);

  if (!(r.alpha >= 0.5 && r.alpha <= 1.0)) throw ConfigError(fmt::format("alpha = {} outside [0.5, 1]", r.alpha));
  if (!(r.lambda >= 0.0)) throw ConfigError(fmt::format("lambda = {} is negative", r.lambda));
  if (!(r.tau > 0.0)) throw ConfigError(fmt::format("tau = {} must be positive", r.tau));
  if (!(r.t_end >= 0.0)) throw ConfigError(fmt::format("t_end = {} is negative", r.t_end));
  if (!(r.s_end >= 0.0)) throw ConfigError(fmt::format("s_end = {} is negative", r.s_end));
  if (r.command == "exp2" && r.lambda != 0.0) throw ConfigError("exp2 runs without confinement; lambda must be 0");
  if (r.command == "exp2" && r.initial != "barenblatt") throw ConfigError("exp2 starts from the barenblatt state");
  if ((r.command == "minimizer" || r.command == "converge") && !(r.lambda > 0.0))
    throw ConfigError(fmt::format("{} needs lambda > 0", r.command));

  const bool known_initial = r.initial == "sine" || r.initial == "barenblatt" || r.initial == "uniform" ||
                             (r.initial.rfind("file:", 0) == 0 && r.initial.size() > 5);
  if (!known_initial) throw ConfigError(fmt::format("unknown initial condition '{}'", r.initial));
  const bool known_grid = r.grid == "uniform" || (r.grid.rfind("nonuniform:", 0) == 0 && r.grid.size() > 11);
  if (!known_grid) throw ConfigError(fmt::format("unknown grid mode '{}'", r.grid));
  return r;
}

GridPtr make_grid(const ResolvedConfig& cfg) {
  if (cfg.grid == "uniform") return make_uniform_grid(cfg.cells);
  const std::string path = cfg.grid.substr(std::string("nonuniform:").size());
  std::vector<double> nodes;
  try {
    nodes = read_numbers(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  try {
    return std::make_shared<const MassGrid>(MassGrid::nonuniform(std::move(nodes)));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("grid file '{}': {}", path, e.what()));
  }
}

LagrangianState make_initial_state(const ResolvedConfig& cfg, const GridPtr& grid) {
  const double M = grid->total_mass();
  if (cfg.initial == "sine") {
    DensitySampler u0;
    u0.density = [](double x) { return 0.25 * std::abs(std::sin(x)) * (0.5 + (x > 0.0 ? 1.0 : 0.0)); };
    u0.support_left = -std::numbers::pi;
    u0.support_right = std::numbers::pi;
    u0.breakpoints = {0.0};
    try {
      return build_initial_vector(u0, grid);
    } catch (const QuantileError& e) {
      throw ConfigError(e.what());
    }
  }
  if (cfg.initial == "uniform") {
    std::vector<double> x(grid->nodes());
    const auto xi = grid->mass_nodes();
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = xi[k] / M - 0.5;
    return LagrangianState(grid, std::move(x));
  }
  if (cfg.initial == "barenblatt") {
    try {
      return discrete_minimizer(ModelParams(cfg.alpha, cfg.lambda > 0.0 ? cfg.lambda : 1.0), grid);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  const std::string path = cfg.initial.substr(5);
  std::vector<double> x;
  try {
    x = read_numbers(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  try {
    return LagrangianState(grid, std::move(x));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(fmt::format("initial positions '{}': {}", path, e.what()));
  }
}

namespace {

CsvHeader make_header(const ResolvedConfig& cfg, const MassGrid& grid) {
  CsvHeader h;
  h.add("command", cfg.command);
  h.add("alpha", cfg.alpha);
  h.add("lambda", cfg.lambda);
  h.add("K", grid.cells());
  h.add("tau", cfg.tau);
  if (cfg.command == "evolve" || cfg.command == "exp1") {
    h.add("t_end", cfg.t_end);
    h.add("stride", cfg.stride);
  }
  if (cfg.command == "exp2") h.add("s_end", cfg.s_end);
  if (cfg.command == "converge") {
    std::string list;
    for (std::size_t K : cfg.cell_list) list += (list.empty() ? "" : ",") + std::to_string(K);
    h.add("cells", list);
  }
  h.add("initial", cfg.initial);
  h.add("grid", cfg.grid);
  h.add("total_mass", grid.total_mass());
  h.add("rate_2lambda_over_1_plus_lambda_tau", 2.0 * cfg.lambda / (1.0 + cfg.lambda * cfg.tau));
  h.add("a_tau", std::pow(1.0 + cfg.tau, -(2.0 * cfg.alpha + 2.0)));
  h.add("b_tau", 1.0 + 2.0 * cfg.tau);
  return h;
}

std::ofstream open_output(const ResolvedConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.output);
  const auto path = std::filesystem::path(cfg.output) / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

// First time the local slope of log(gap) over `window` steps lies within 10% of -2 lambda.
double crossover_time(const std::vector<TimeseriesRow>& rows, double lambda, std::size_t window) {
  const double target = -2.0 * lambda;
  for (std::size_t n = 0; n + window < rows.size(); ++n) {
    const double a = rows[n].entropy_gap, b = rows[n + window].entropy_gap;
    if (!(a > 0.0) || !(b > 0.0)) break;
    const double slope = (std::log(b) - std::log(a)) / (rows[n + window].t - rows[n].t);
    if (std::abs(slope - target) <= 0.1 * std::abs(target)) return rows[n].t;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

int run_evolve(const ResolvedConfig& cfg, std::ostream& log) {
  const GridPtr grid = make_grid(cfg);
  const LagrangianState x0 = make_initial_state(cfg, grid);
  const ModelParams p(cfg.alpha, cfg.lambda);

  std::optional<EquilibriumLevels> levels;
  std::optional<PiecewiseConstantDensity> u_min;
  if (p.lambda() > 0.0 && std::abs(grid->total_mass() - 1.0) <= 1e-14) {
    const auto xmin = discrete_minimizer(p, grid);
    levels = equilibrium_levels(xmin, p);
    u_min = density_from_state(xmin);
  }
  const auto steps = uniform_steps(cfg.tau, cfg.t_end);
  log << fmt::format("{}: K = {}, {} steps\n", cfg.command, grid->cells(), steps.size());
  const Trajectory traj = evolve(x0, steps, p, StepConfig{}, levels);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<TimeseriesRow> rows;
  std::vector<double> snap_t;
  std::vector<LagrangianState> snap_x;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const auto& pt = traj.points[n];
    TimeseriesRow r;
    r.t = pt.time;
    r.entropy = pt.report.entropy;
    r.information = pt.report.information;
    r.entropy_gap = levels ? r.entropy - levels->entropy : nan;
    r.information_gap = levels ? r.information - levels->information : nan;
    r.l1_error = u_min ? l1_distance(density_from_state(pt.state), *u_min) : nan;
    r.newton_iterations = pt.report.newton_iterations;
    r.residual = pt.report.residual;
    rows.push_back(r);
    if (n % cfg.stride == 0 || n + 1 == traj.size()) {
      snap_t.push_back(pt.time);
      snap_x.push_back(pt.state);
    }
  }

  CsvHeader header = make_header(cfg, *grid);
  if (levels) {
    header.add("H_min", levels->entropy);
    header.add("F_min", levels->information);
  }
  if (cfg.command == "exp1" && levels) header.add("crossover_time", crossover_time(rows, p.lambda(), 10));

  auto ts = open_output(cfg, "timeseries.csv");
  write_timeseries(ts, header, rows);
  auto sn = open_output(cfg, "snapshots.csv");
  write_snapshots(sn, header, snap_t, snap_x);
  auto de = open_output(cfg, "density.csv");
  write_densities(de, header, snap_t, snap_x);
  return kSuccess;
}

int run_exp2(const ResolvedConfig& cfg, std::ostream& log) {
  const GridPtr grid = make_grid(cfg);
  const ModelParams free_flow(cfg.alpha, 0.0), unit(cfg.alpha, 1.0);
  const LagrangianState xmin = make_initial_state(cfg, grid);

  std::vector<double> base;
  {
    double S = 1.0, s = 0.0;
    while (s < cfg.s_end) {
      const double next = (1.0 + cfg.tau) * S;
      s += cfg.tau * S * std::pow(next, 2.0 * cfg.alpha + 2.0);
      S = next;
      base.push_back(cfg.tau);
    }
  }
  const RescaleSchedule schedule(base, cfg.alpha);
  log << fmt::format("exp2: K = {}, {} steps up to transformed time {}\n", grid->cells(), base.size(),
                     schedule.scaled_times().back());
  const Trajectory traj = evolve(xmin, schedule.scaled_steps(), free_flow);
  const auto profile = reference_profile(unit);

  std::vector<SelfSimilarRow> rows;
  std::vector<double> snap_t;
  std::vector<LagrangianState> snap_x;
  const auto& times = schedule.scaled_times();
  for (double target : {0.0, 0.1, 1.0, 10.0, 100.0}) {
    if (target > cfg.s_end) continue;
    std::size_t n = 0;
    while (n + 1 < times.size() && times[n + 1] <= target * (1.0 + 1e-12)) ++n;
    const auto& state = traj.points[n].state;
    const double S = schedule.growth()[n];
    double dev = 0.0;
    for (std::size_t k = 0; k < state.nodes(); ++k) dev = std::max(dev, std::abs(state[k] - S * xmin[k]));
    SelfSimilarRow r;
    r.step = n;
    r.scaled_time = times[n];
    r.growth = S;
    r.max_coordinate_deviation = dev;
    r.l1_deviation = lp_error(density_from_state(state), profile.dilated(continuous_rescale_factor(times[n], cfg.alpha)), 1.0);
    r.decay_factor = discrete_decay_factor(n, schedule);
    rows.push_back(r);
    snap_t.push_back(times[n]);
    snap_x.push_back(state);
  }
  CsvHeader header = make_header(cfg, *grid);
  header.add("steps", base.size());
  auto ss = open_output(cfg, "selfsim.csv");
  write_selfsim(ss, header, rows);
  auto sn = open_output(cfg, "snapshots.csv");
  write_snapshots(sn, header, snap_t, snap_x);
  auto de = open_output(cfg, "density.csv");
  write_densities(de, header, snap_t, snap_x);
  return kSuccess;
}

int run_minimizer(const ResolvedConfig& cfg, std::ostream& log) {
  const GridPtr grid = make_grid(cfg);
  const ModelParams p(cfg.alpha, cfg.lambda);
  const auto xmin = discrete_minimizer(p, grid);
  const auto levels = equilibrium_levels(xmin, p);
  CsvHeader header = make_header(cfg, *grid);
  header.add("H_min", levels.entropy);
  header.add("F_min", levels.information);
  header.add("entropy_gradient_norm", norm(entropy_gradient(xmin, p).metric, *grid));
  header.add("information_gradient_norm", norm(information_gradient(xmin, p).metric, *grid));
  log << fmt::format("minimizer: K = {}, H_min = {}\n", grid->cells(), format_double(levels.entropy));
  auto out = open_output(cfg, fmt::format("minimizer_K{}.csv", grid->cells()));
  write_snapshots(out, header, {0.0}, {xmin});
  return kSuccess;
}

int run_converge(const ResolvedConfig& cfg, std::ostream& log) {
  if (cfg.grid != "uniform") throw ConfigError("converge uses uniform grids only");
  const ModelParams p(cfg.alpha, cfg.lambda);
  const auto rows = convergence_study(p, cfg.cell_list, true);
  CsvHeader header = make_header(cfg, *make_uniform_grid(cfg.cell_list.front()));
  if (rows.size() >= 2) {
    std::vector<double> k, l2;
    for (const auto& r : rows) {
      k.push_back(static_cast<double>(r.cells));
      l2.push_back(r.l2);
    }
    header.add("l2_slope", loglog_slope(k, l2));
  }
  log << fmt::format("converge: {} grid sizes\n", rows.size());
  auto out = open_output(cfg, "convergence.csv");
  write_convergence(out, header, rows);
  return kSuccess;
}

}  // namespace

int run(const ResolvedConfig& cfg, std::ostream& log) {
  try {
    if (cfg.command == "evolve" || cfg.command == "exp1") return run_evolve(cfg, log);
    if (cfg.command == "exp2") return run_exp2(cfg, log);
    if (cfg.command == "minimizer") return run_minimizer(cfg, log);
    if (cfg.command == "converge") return run_converge(cfg, log);
    throw ConfigError(fmt::format("unknown command '{}'", cfg.command));
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SolverFailure& e) {
    log << fmt::format("solver failure: {}\nlast residual: {}\ncompleted steps: {}\n", e.what(),
                       format_double(e.last_residual()), e.partial().size() - 1);
    return kSolverFailure;
  } catch (const std::exception& e) {
    log << "solver failure: " << e.what() << '\n';
    return kSolverFailure;
  }
}

int main(int argc, char** argv) {
  CLI::App app{"Lagrangian minimizing-movement solver for fourth-order gradient flows"};
  std::string command, config_path;
  app.add_option("command", command, "evolve | exp1 | exp2 | minimizer | converge");
  app.add_option("-c,--config", config_path, "key = value config file");

  // flag name -> config key
  const std::vector<std::pair<std::string, std::string>> flags{
      {"--alpha", "alpha"}, {"--lambda", "lambda"},   {"-K", "K"}, {"--tau", "tau"},
      {"--t-end", "t_end"}, {"--s-end", "s_end"},     {"--initial", "initial"},     {"--grid", "grid"},
      {"-o,--output", "output"}, {"--stride", "stride"}, {"--cells", "cells"}};
  std::map<std::string, std::string> values;
  std::vector<std::pair<CLI::Option*, std::string>> options;
  for (const auto& [flag, key] : flags) options.emplace_back(app.add_option(flag, values[key]), key);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kConfigError;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) parse_config_file(cfg, config_path);
    if (!command.empty()) cfg.command = command;
    for (const auto& [opt, key] : options)
      if (opt->count() > 0) apply_setting(cfg, key, values[key]);
    const ResolvedConfig resolved = resolve(cfg);
    return run(resolved, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace lagflow::cli
