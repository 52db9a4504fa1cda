#pragma once

#include <cstddef>
#include <vector>

#include "lagflow/functionals.hpp"
#include "lagflow/mass_mesh.hpp"
#include "lagflow/stepper.hpp"

namespace lagflow {

/// Unit-mass stationary profile: (a - b x^2)_+^m with m = 1/(alpha - 1/2)
/// for alpha > 1/2, or a exp(-Lambda x^2) for alpha = 1/2. A dilated copy
/// x -> u(x/r)/r keeps unit mass.
class EquilibriumProfile {
 public:
  explicit EquilibriumProfile(const ModelParams& p);

  bool gaussian() const { return gaussian_; }
  double height() const { return height_; }
  double curvature() const { return curvature_; }
  double exponent() const { return exponent_; }
  double modulus() const { return modulus_; }
  double scale() const { return scale_; }
  /// Half-width of the support; infinite for the Gaussian.
  double support_radius() const;

  double operator()(double x) const;
  double cdf(double x) const;
  double quantile(double mass) const;
  /// Mass by numerical quadrature.
  double mass() const;
  /// Continuous entropy with the confinement of the parameters it was built from.
  double entropy() const;

  EquilibriumProfile dilated(double r) const;

 private:
  ModelParams params_;
  bool gaussian_ = false;
  double height_ = 0.0;
  double curvature_ = 0.0;
  double exponent_ = 0.0;
  double modulus_ = 0.0;
  double scale_ = 1.0;
};

/// Throws std::domain_error for lambda = 0.
EquilibriumProfile reference_profile(const ModelParams& p);

struct MinimizerConfig {
  int max_iterations = 200;
  double tolerance = 1e-11;
};

/// Minimizer of the discrete entropy by damped Newton. Requires lambda > 0
/// and unit total mass.
LagrangianState discrete_minimizer(const ModelParams& p, GridPtr grid, const MinimizerConfig& cfg = {});

/// Entropy and information at the discrete minimizer.
EquilibriumLevels equilibrium_levels(const LagrangianState& x_min, const ModelParams& p);

double lp_error(const PiecewiseConstantDensity& u, const EquilibriumProfile& ref, double exponent);
/// Essential supremum of |u - ref| (breakpoints excluded).
double linf_error(const PiecewiseConstantDensity& u, const EquilibriumProfile& ref);
/// Supremum of |u_hat - ref| by dense sampling plus knots.
double uniform_error(const AffineInterpolant& u, const EquilibriumProfile& ref);

struct ConvergenceRow {
  std::size_t cells = 0;
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
  double entropy_gap = 0.0;  // discrete minimum minus continuous entropy
};

ConvergenceRow convergence_row(const ModelParams& p, std::size_t cells);
/// One row per grid size; rows are computed concurrently when parallel is set.
std::vector<ConvergenceRow> convergence_study(const ModelParams& p, const std::vector<std::size_t>& cells,
                                              bool parallel = true);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lagflow
