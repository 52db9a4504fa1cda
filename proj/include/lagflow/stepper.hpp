#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lagflow/functionals.hpp"
#include "lagflow/mass_mesh.hpp"

namespace lagflow {

struct StepConfig {
  int max_iterations = 50;
  double tolerance = 1e-11;
  double backtracking = 0.5;
  double min_damping = 0x1p-30;
  double armijo = 1e-4;
  double monotone_margin = 1e-14;
  int max_halvings = 10;
};

/// Minimal values of entropy and information, used for gap diagnostics.
struct EquilibriumLevels {
  double entropy = 0.0;
  double information = 0.0;
};

struct StepReport {
  double time = 0.0;
  double step = 0.0;
  int newton_iterations = 0;
  int halvings = 0;
  double residual = 0.0;
  double entropy = 0.0;
  double information = 0.0;
  double yosida = 0.0;
  /// (H^{n-1} - H_min) - (1 + 2 tau lambda)(H^n - H_min); NaN without levels.
  double entropy_slack = std::numeric_limits<double>::quiet_NaN();
  double information_slack = std::numeric_limits<double>::quiet_NaN();
};

struct TrajectoryPoint {
  double time;
  LagrangianState state;
  StepReport report;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;

  std::size_t size() const { return points.size(); }
  const TrajectoryPoint& back() const { return points.back(); }
};

struct StepOutcome {
  bool converged = false;
  LagrangianState state;
  int iterations = 0;
  double residual = 0.0;
  std::string reason;
};

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double last_residual, Trajectory partial)
      : std::runtime_error(what), last_residual_(last_residual), partial_(std::move(partial)) {}
  double last_residual() const { return last_residual_; }
  const Trajectory& partial() const { return partial_; }

 private:
  double last_residual_;
  Trajectory partial_;
};

/// (x - x_prev)/tau + metric gradient of the information at x.
std::vector<double> residual(const LagrangianState& x, const LagrangianState& x_prev, double tau,
                             const ModelParams& p);
double residual_norm(const LagrangianState& x, const LagrangianState& x_prev, double tau, const ModelParams& p);

/// |x - x_prev|^2 / (2 tau) + F(x).
double yosida_value(const LagrangianState& x, const LagrangianState& x_prev, double tau, const ModelParams& p);

/// Residual level below which rounding in the positions dominates.
double residual_floor(const LagrangianState& x, const LagrangianState& x_prev, double tau, const ModelParams& p);

/// One implicit step by damped Newton starting from x_prev.
StepOutcome solve_step(const LagrangianState& x_prev, double tau, const ModelParams& p,
                       const StepConfig& cfg = {});

/// Evolves through the given step sizes. A failed step is retried as two
/// half steps, recursively up to cfg.max_halvings levels. Throws
/// SolverFailure carrying the trajectory computed so far.
Trajectory evolve(const LagrangianState& initial, const std::vector<double>& steps, const ModelParams& p,
                  const StepConfig& cfg = {}, std::optional<EquilibriumLevels> levels = std::nullopt);

/// Constant steps of size tau covering [0, t_end]; the last step is shortened
/// to land on t_end.
std::vector<double> uniform_steps(double tau, double t_end);

struct AdmissibilityBounds {
  double support = 0.0;           // L = sqrt(2 tau C / delta) + |y|_inf
  double density = 0.0;           // upper bound on every cell density
  double confined_support = std::numeric_limits<double>::infinity();  // lambda > 0 only
};

/// A-priori bounds for the minimizer of one step, given an energy bound C >= F(x_prev).
AdmissibilityBounds admissibility_bounds(const LagrangianState& x_prev, double tau, const ModelParams& p,
                                         double energy_bound);

}  // namespace lagflow
