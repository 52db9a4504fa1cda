#include "lagflow/stepper.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lagflow/summation.hpp"

namespace lagflow {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Euclidean gradient of the Yosida functional.
std::vector<double> yosida_partial(const LagrangianState& x, const LagrangianState& x_prev, double tau,
                                   const ModelParams& p) {
  const auto w = x.grid().node_weights();
  auto g = information_gradient(x, p).partial;
  for (std::size_t k = 0; k < g.size(); ++k) g[k] += w[k] * (x[k] - x_prev[k]) / tau;
  return g;
}

double metric_norm_of_partial(std::span<const double> g, const MassGrid& grid) {
  const auto w = grid.node_weights();
  CompensatedSum acc;
  for (std::size_t k = 0; k < g.size(); ++k) acc += g[k] * g[k] / w[k];
  return std::sqrt(acc.value());
}

// Size of the rounding noise in a computed Yosida value.
double yosida_rounding(const LagrangianState& x, double value, const ModelParams& p) {
  const auto z = x.cell_densities();
  const auto w = x.grid().node_weights();
  double mag = std::abs(value);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double left = k > 0 ? p.pressure(z[k - 1]) : 0.0;
    const double right = k < z.size() ? p.pressure(z[k]) : 0.0;
    mag += (left + right) * (left + right) / w[k];
  }
  return 64.0 * kEps * mag;
}

bool admissible(std::span<const double> x, double margin) {
  const double span = x.back() - x.front();
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    if (!std::isfinite(x[k + 1]) || !(x[k + 1] - x[k] > margin * span)) return false;
  }
  return true;
}

double dot(std::span<const double> a, std::span<const double> b) {
  CompensatedSum acc;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc.value();
}

}  // namespace

std::vector<double> residual(const LagrangianState& x, const LagrangianState& x_prev, double tau,
                             const ModelParams& p) {
  require_same_grid(x, x_prev);
  if (!(tau > 0.0)) throw std::invalid_argument("time step must be positive");
  auto r = information_gradient(x, p).metric;
  for (std::size_t k = 0; k < r.size(); ++k) r[k] += (x[k] - x_prev[k]) / tau;
  return r;
}

double residual_norm(const LagrangianState& x, const LagrangianState& x_prev, double tau, const ModelParams& p) {
  return norm(residual(x, x_prev, tau, p), x.grid());
}

double yosida_value(const LagrangianState& x, const LagrangianState& x_prev, double tau, const ModelParams& p) {
  require_same_grid(x, x_prev);
  if (!(tau > 0.0)) throw std::invalid_argument("time step must be positive");
  std::vector<double> diff(x.nodes());
  for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = x[k] - x_prev[k];
  return inner_product(diff, diff, x.grid()) / (2.0 * tau) + information(x, p).value();
}

double residual_floor(const LagrangianState& x, const LagrangianState& x_prev, double tau, const ModelParams& p) {
  const auto w = x.grid().node_weights();
  const auto h = information_hessian(x, p);
  std::vector<double> ax(x.nodes());
  for (std::size_t k = 0; k < ax.size(); ++k) ax[k] = std::abs(x[k]);
  auto terms = h.abs_multiply(ax);
  for (std::size_t k = 0; k < terms.size(); ++k)
    terms[k] += w[k] * (std::abs(x[k]) + std::abs(x_prev[k])) / tau;
  return 32.0 * kEps * metric_norm_of_partial(terms, x.grid());
}

StepOutcome solve_step(const LagrangianState& x_prev, double tau, const ModelParams& p, const StepConfig& cfg) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("time step must be positive and finite");
  const GridPtr& grid = x_prev.grid_ptr();
  const auto w = grid->node_weights();
  const std::size_t n = x_prev.nodes();

  LagrangianState x = x_prev;
  double value = yosida_value(x, x_prev, tau, p);
  auto g = yosida_partial(x, x_prev, tau, p);
  double res = metric_norm_of_partial(g, *grid);

  for (int it = 0; it <= cfg.max_iterations; ++it) {
    if (res <= std::max(cfg.tolerance, residual_floor(x, x_prev, tau, p)))
      return {.converged = true, .state = x, .iterations = it, .residual = res, .reason = {}};
    if (it == cfg.max_iterations) break;

    auto a = information_hessian(x, p);
    a.add_diagonal(w, 1.0 / tau);
    std::vector<double> rhs(n), d;
    for (std::size_t k = 0; k < n; ++k) rhs[k] = -g[k];

    bool descent = a.solve(rhs, d) && dot(g, d) < 0.0;
    double shift = 1.0 / tau;
    for (int tries = 0; !descent && tries < 40; ++tries, shift *= 10.0) {
      auto shifted = a;
      shifted.add_diagonal(w, shift);
      descent = shifted.solve(rhs, d) && dot(g, d) < 0.0;
    }
    if (!descent)
      return {.converged = false, .state = x, .iterations = it, .residual = res, .reason = "no descent direction"};

    const double slope = dot(g, d);
    const double noise = yosida_rounding(x, value, p);
    bool accepted = false;
    for (double theta = 1.0; theta >= cfg.min_damping; theta *= cfg.backtracking) {
      std::vector<double> trial(n);
      for (std::size_t k = 0; k < n; ++k) trial[k] = x[k] + theta * d[k];
      if (!admissible(trial, cfg.monotone_margin)) continue;
      LagrangianState candidate(grid, std::move(trial));
      const double cand_value = yosida_value(candidate, x_prev, tau, p);
      if (!std::isfinite(cand_value)) continue;
      bool ok = cand_value <= value + cfg.armijo * theta * slope;
      std::vector<double> cand_g;
      double cand_res = 0.0;
      if (!ok && cand_value <= value + noise) {
        cand_g = yosida_partial(candidate, x_prev, tau, p);
        cand_res = metric_norm_of_partial(cand_g, *grid);
        ok = cand_res < res;
      }
      if (!ok) continue;
      if (cand_g.empty()) {
        cand_g = yosida_partial(candidate, x_prev, tau, p);
        cand_res = metric_norm_of_partial(cand_g, *grid);
      }
      x = std::move(candidate);
      value = cand_value;
      g = std::move(cand_g);
      res = cand_res;
      accepted = true;
      break;
    }
    if (!accepted)
      return {.converged = false, .state = x, .iterations = it, .residual = res, .reason = "damping underflow"};
  }
  return {.converged = false,
          .state = x,
          .iterations = cfg.max_iterations,
          .residual = res,
          .reason = fmt::format("no convergence after {} Newton iterations", cfg.max_iterations)};
}

namespace {

struct StepFailed {
  double residual;
  std::string reason;
};

struct Advance {
  LagrangianState state;
  int iterations = 0;
  int halvings = 0;
  double residual = 0.0;
};

Advance advance(const LagrangianState& x, double tau, const ModelParams& p, const StepConfig& cfg, int depth) {
  StepOutcome o = solve_step(x, tau, p, cfg);
  if (o.converged) return {std::move(o.state), o.iterations, depth, o.residual};
  if (depth >= cfg.max_halvings)
    throw StepFailed{o.residual, fmt::format("{} (tau = {:.6g} after {} halvings)", o.reason, tau, depth)};
  Advance first = advance(x, 0.5 * tau, p, cfg, depth + 1);
  Advance second = advance(first.state, 0.5 * tau, p, cfg, depth + 1);
  second.iterations += first.iterations + o.iterations;
  second.halvings = std::max(first.halvings, second.halvings);
  return second;
}

StepReport describe(double time, double step, const LagrangianState& x, const ModelParams& p) {
  StepReport r;
  r.time = time;
  r.step = step;
  r.entropy = entropy(x, p).value();
  r.information = information(x, p).value();
  r.yosida = r.information;
  return r;
}

}  // namespace

std::vector<double> uniform_steps(double tau, double t_end) {
  if (!(tau > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("end time must be non-negative");
  if (t_end == 0.0) return {};
  const double ratio = t_end / tau;
  const double whole = std::round(ratio);
  if (std::abs(ratio - whole) <= 1e-9 * std::max(1.0, ratio))
    return std::vector<double>(static_cast<std::size_t>(whole), tau);
  const auto n = static_cast<std::size_t>(std::ceil(ratio));
  std::vector<double> steps(n, tau);
  steps.back() = t_end - static_cast<double>(n - 1) * tau;
  return steps;
}

Trajectory evolve(const LagrangianState& initial, const std::vector<double>& steps, const ModelParams& p,
                  const StepConfig& cfg, std::optional<EquilibriumLevels> levels) {
  for (double tau : steps)
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("time steps must be positive and finite");

  Trajectory traj;
  traj.points.push_back({0.0, initial, describe(0.0, 0.0, initial, p)});
  CompensatedSum time;
  for (double tau : steps) {
    const TrajectoryPoint& prev = traj.points.back();
    Advance a{prev.state};
    try {
      a = advance(prev.state, tau, p, cfg, 0);
    } catch (const StepFailed& f) {
      throw SolverFailure(fmt::format("step {} failed: {}", traj.points.size(), f.reason), f.residual,
                          std::move(traj));
    }
    time += tau;
    StepReport r = describe(time.value(), tau, a.state, p);
    r.newton_iterations = a.iterations;
    r.halvings = a.halvings;
    r.residual = a.residual;
    r.yosida = yosida_value(a.state, prev.state, tau, p);
    if (levels) {
      const double factor = 1.0 + 2.0 * tau * p.lambda();
      r.entropy_slack = (prev.report.entropy - levels->entropy) - factor * (r.entropy - levels->entropy);
      r.information_slack =
          (prev.report.information - levels->information) - factor * (r.information - levels->information);
    }
    traj.points.push_back({r.time, std::move(a.state), r});
  }
  return traj;
}

AdmissibilityBounds admissibility_bounds(const LagrangianState& x_prev, double tau, const ModelParams& p,
                                         double energy_bound) {
  const double delta = x_prev.grid().min_node_weight();
  const double M = x_prev.grid().total_mass();
  AdmissibilityBounds b;
  b.support = std::sqrt(2.0 * tau * energy_bound / delta) + x_prev.max_abs_position();
  const double e = p.pressure_exponent();
  b.density = std::pow(M * energy_bound / p.pressure_scale() + std::pow(2.0 * b.support, e), 1.0 / e);
  if (p.lambda() > 0.0) b.confined_support = std::sqrt(2.0 * energy_bound / (delta * p.lambda()));
  return b;
}

}  // namespace lagflow
