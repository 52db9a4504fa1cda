#pragma once

#include <cstddef>
#include <vector>

#include "lagflow/functionals.hpp"
#include "lagflow/mass_mesh.hpp"
#include "lagflow/stepper.hpp"

namespace lagflow {

/// Scales all positions by r > 0; densities scale by 1/r.
LagrangianState dilate(const LagrangianState& s, double r);

struct ScalingResidual {
  double entropy = 0.0;
  double information = 0.0;
};

/// Relative residuals of the dilation laws of the unconfined functionals:
/// H(r x) = r^{-(2 alpha - 1)/2} H(x) (H(x) - c M ln r in the logarithmic
/// case) and F(r x) = r^{-(2 alpha + 1)} F(x).
ScalingResidual check_scaling_identities(const LagrangianState& s, const ModelParams& p, double r);

struct TransferredStep {
  double step = 0.0;
  double confinement = 0.0;
};

/// Step size and confinement of the problem solved by the dilation d_R of a
/// minimizer of the step with size tau and confinement lambda taken from d_S y.
TransferredStep rescaled_minimizing_movement_transfer(double tau, double lambda, double R, double S, double alpha);

/// Bookkeeping for zero-confinement runs: growth factors S^n, transformed
/// step sizes and transformed times.
class RescaleSchedule {
 public:
  RescaleSchedule(std::vector<double> base_steps, double alpha);

  std::size_t steps() const { return base_steps_.size(); }
  double alpha() const { return alpha_; }
  const std::vector<double>& base_steps() const { return base_steps_; }
  const std::vector<double>& base_times() const { return base_times_; }
  /// S^0 = 1, S^n = (1 + tau_n) S^{n-1}.
  const std::vector<double>& growth() const { return growth_; }
  /// tau_hat_n = tau_n S^{n-1} (S^n)^{2 alpha + 2}; index n-1 holds step n.
  const std::vector<double>& scaled_steps() const { return scaled_steps_; }
  /// s_hat_0 = 0, s_hat_n = sum of the first n scaled steps.
  const std::vector<double>& scaled_times() const { return scaled_times_; }
  double max_step() const { return max_step_; }
  /// (1 + tau)^{-(2 alpha + 2)} with tau the largest base step.
  double time_factor() const;
  /// 1 + 2 tau.
  double exponent_factor() const;

 private:
  double alpha_;
  double max_step_ = 0.0;
  std::vector<double> base_steps_;
  std::vector<double> base_times_;
  std::vector<double> growth_;
  std::vector<double> scaled_steps_;
  std::vector<double> scaled_times_;
};

/// Dilations d_{S^n} of a state at the transformed times.
std::vector<LagrangianState> self_similar_solution(const LagrangianState& profile, const RescaleSchedule& schedule);
/// Same, starting from the minimizer of the entropy with unit confinement.
std::vector<LagrangianState> self_similar_solution(double alpha, GridPtr grid, const RescaleSchedule& schedule);

/// (1 + (2 alpha + 3) t)^{1/(2 alpha + 3)}.
double continuous_rescale_factor(double t, double alpha);
/// Decay factor after n steps of the schedule, at the transformed time s_hat_n.
double discrete_decay_factor(std::size_t n, const RescaleSchedule& schedule);
/// Decay factor at time t for maximal base step tau.
double discrete_decay_factor(double t, double tau, double alpha);

}  // namespace lagflow
