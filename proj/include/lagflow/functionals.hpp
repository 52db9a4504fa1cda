#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "lagflow/banded.hpp"
#include "lagflow/mass_mesh.hpp"

namespace lagflow {

/// Mobility exponent alpha in [1/2, 1] and confinement strength lambda >= 0.
class ModelParams {
 public:
  ModelParams(double alpha, double lambda);

  double alpha() const { return alpha_; }
  double lambda() const { return lambda_; }
  /// sqrt(2 alpha) / (2 alpha + 1), the prefactor of the pressure s -> c s^(alpha+1/2).
  double pressure_scale() const { return pressure_scale_; }
  /// sqrt(lambda / (2 alpha + 1)), the convexity modulus of the entropy.
  double convexity_modulus() const { return convexity_modulus_; }
  /// alpha + 1/2.
  double pressure_exponent() const { return alpha_ + 0.5; }
  bool logarithmic() const { return alpha_ == 0.5; }

  /// Entropy density generator f(s) (s > 0).
  double entropy_density(double s) const;
  /// s * f(s), the integrand of the continuous entropy.
  double entropy_integrand(double s) const;
  /// pressure_scale * s^(alpha+1/2), zero at s = 0.
  double pressure(double s) const;

 private:
  double alpha_;
  double lambda_;
  double pressure_scale_;
  double convexity_modulus_;
};

struct FunctionalValue {
  double internal = 0.0;
  double drift = 0.0;
  double value() const { return internal + drift; }
};

/// Euclidean partial derivatives and the metric gradient (partial / node weight).
struct Gradient {
  std::vector<double> partial;
  std::vector<double> metric;
};

double inner_product(std::span<const double> v, std::span<const double> w, const MassGrid& grid);
double norm(std::span<const double> v, const MassGrid& grid);

FunctionalValue entropy(const LagrangianState& s, const ModelParams& p);
FunctionalValue information(const LagrangianState& s, const ModelParams& p);

Gradient entropy_gradient(const LagrangianState& s, const ModelParams& p);
Gradient information_gradient(const LagrangianState& s, const ModelParams& p);

/// Euclidean Hessians. The entropy Hessian is tridiagonal, the information
/// Hessian pentadiagonal.
SymmetricBand entropy_hessian(const LagrangianState& s, const ModelParams& p);
SymmetricBand information_hessian(const LagrangianState& s, const ModelParams& p);

/// Dense assembly through matrix products, independent of the banded loops.
Eigen::MatrixXd entropy_hessian_dense(const LagrangianState& s, const ModelParams& p);
Eigen::MatrixXd information_hessian_dense(const LagrangianState& s, const ModelParams& p);

/// |F - (|grad H|^2 + (2 alpha - 1) Lambda H)| / max(1, |F|); for alpha = 1/2
/// the last term is Lambda.
double check_entropy_information_relation(const LagrangianState& s, const ModelParams& p);

/// Total variation of a piecewise-constant function with zero exterior.
double total_variation(std::span<const double> values);
double total_variation(const PiecewiseConstantDensity& u);
/// Cell values of the pressure transform of a density.
std::vector<double> pressure_values(const PiecewiseConstantDensity& u, const ModelParams& p);

}  // namespace lagflow
