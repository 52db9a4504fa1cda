#include "lagflow/functionals.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "lagflow/summation.hpp"

namespace lagflow {

ModelParams::ModelParams(double alpha, double lambda) : alpha_(alpha), lambda_(lambda) {
  if (!(alpha >= 0.5 && alpha <= 1.0)) throw std::invalid_argument(fmt::format("alpha = {} outside [1/2, 1]", alpha));
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument(fmt::format("lambda = {} must be finite and non-negative", lambda));
  pressure_scale_ = std::sqrt(2.0 * alpha) / (2.0 * alpha + 1.0);
  convexity_modulus_ = std::sqrt(lambda / (2.0 * alpha + 1.0));
}

double ModelParams::entropy_density(double s) const {
  if (logarithmic()) return pressure_scale_ * std::log(s);
  const double e = alpha_ - 0.5;
  return pressure_scale_ * std::pow(s, e) / e;
}

double ModelParams::entropy_integrand(double s) const {
  if (s <= 0.0) return 0.0;
  return s * entropy_density(s);
}

double ModelParams::pressure(double s) const {
  if (s <= 0.0) return 0.0;
  return pressure_scale_ * std::pow(s, pressure_exponent());
}

double inner_product(std::span<const double> v, std::span<const double> w, const MassGrid& grid) {
  const auto weights = grid.node_weights();
  if (v.size() != weights.size() || w.size() != weights.size())
    throw std::invalid_argument(
        fmt::format("inner product of lengths {} and {} on a grid with {} nodes", v.size(), w.size(), weights.size()));
  CompensatedSum acc;
  for (std::size_t k = 0; k < weights.size(); ++k) acc += weights[k] * (v[k] * w[k]);
  return acc.value();
}

double norm(std::span<const double> v, const MassGrid& grid) { return std::sqrt(inner_product(v, v, grid)); }

namespace {

// P(z_{k}) - P(z_{k-1}) at every node, exterior densities zero.
std::vector<double> pressure_jumps(const std::vector<double>& z, const ModelParams& p) {
  const std::size_t K = z.size();
  std::vector<double> g(K + 1, 0.0);
  for (std::size_t j = 0; j < K; ++j) {
    const double P = p.pressure(z[j]);
    g[j] += P;
    g[j + 1] -= P;
  }
  return g;
}

// Curvature of the pressure in position space: d P(z_j) = q_j (e_j - e_{j+1}).
std::vector<double> pressure_stiffness(const std::vector<double>& z, std::span<const double> widths,
                                       const ModelParams& p) {
  const double e = p.pressure_exponent();
  std::vector<double> q(z.size());
  for (std::size_t j = 0; j < z.size(); ++j)
    q[j] = p.pressure_scale() * e * std::pow(z[j], e + 1.0) / widths[j];
  return q;
}

double weighted_square(const LagrangianState& s) {
  const auto w = s.grid().node_weights();
  CompensatedSum acc;
  for (std::size_t k = 0; k < w.size(); ++k) acc += w[k] * s[k] * s[k];
  return acc.value();
}

std::vector<double> to_metric(const std::vector<double>& partial, const MassGrid& grid) {
  const auto w = grid.node_weights();
  std::vector<double> m(partial.size());
  for (std::size_t k = 0; k < m.size(); ++k) m[k] = partial[k] / w[k];
  return m;
}

}  // namespace

FunctionalValue entropy(const LagrangianState& s, const ModelParams& p) {
  const auto widths = s.grid().cell_widths();
  const auto z = s.cell_densities();
  CompensatedSum acc;
  for (std::size_t j = 0; j < z.size(); ++j) acc += widths[j] * p.entropy_density(z[j]);
  return {acc.value(), 0.5 * p.convexity_modulus() * weighted_square(s)};
}

FunctionalValue information(const LagrangianState& s, const ModelParams& p) {
  const auto weights = s.grid().node_weights();
  const auto g = pressure_jumps(s.cell_densities(), p);
  CompensatedSum acc;
  for (std::size_t k = 0; k < g.size(); ++k) acc += g[k] * g[k] / weights[k];
  return {acc.value(), 0.5 * p.lambda() * weighted_square(s)};
}

Gradient entropy_gradient(const LagrangianState& s, const ModelParams& p) {
  const auto weights = s.grid().node_weights();
  auto g = pressure_jumps(s.cell_densities(), p);
  for (std::size_t k = 0; k < g.size(); ++k) g[k] += p.convexity_modulus() * weights[k] * s[k];
  Gradient out;
  out.metric = to_metric(g, s.grid());
  out.partial = std::move(g);
  return out;
}

Gradient information_gradient(const LagrangianState& s, const ModelParams& p) {
  const auto weights = s.grid().node_weights();
  const auto z = s.cell_densities();
  const auto g = pressure_jumps(z, p);
  const auto q = pressure_stiffness(z, s.grid().cell_widths(), p);
  const std::size_t K = z.size();

  std::vector<double> w(K + 1);
  for (std::size_t k = 0; k <= K; ++k) w[k] = g[k] / weights[k];

  std::vector<double> d(K + 1, 0.0);
  for (std::size_t j = 0; j < K; ++j) {
    const double c = 2.0 * q[j] * (w[j] - w[j + 1]);
    d[j] += c;
    d[j + 1] -= c;
  }
  for (std::size_t k = 0; k <= K; ++k) d[k] += p.lambda() * weights[k] * s[k];
  Gradient out;
  out.metric = to_metric(d, s.grid());
  out.partial = std::move(d);
  return out;
}

SymmetricBand entropy_hessian(const LagrangianState& s, const ModelParams& p) {
  const auto z = s.cell_densities();
  const auto q = pressure_stiffness(z, s.grid().cell_widths(), p);
  const std::size_t K = z.size();
  SymmetricBand h(K + 1, 1);
  for (std::size_t j = 0; j < K; ++j) {
    h.add(j, j, q[j]);
    h.add(j + 1, j + 1, q[j]);
    h.add(j, j + 1, -q[j]);
  }
  h.add_diagonal(s.grid().node_weights(), p.convexity_modulus());
  return h;
}

SymmetricBand information_hessian(const LagrangianState& s, const ModelParams& p) {
  const auto weights = s.grid().node_weights();
  const auto z = s.cell_densities();
  const auto q = pressure_stiffness(z, s.grid().cell_widths(), p);
  const auto g = pressure_jumps(z, p);
  const std::size_t K = z.size();
  const std::size_t n = K + 1;
  const double e = p.pressure_exponent();

  // Tridiagonal pressure stiffness, J(i, k) for |i - k| <= 1.
  auto stiff = [&](std::size_t i, std::size_t k) {
    if (i == k) return (i > 0 ? q[i - 1] : 0.0) + (i < K ? q[i] : 0.0);
    return -q[std::min(i, k)];
  };

  SymmetricBand h(n, 2);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lo = k > 0 ? k - 1 : 0, hi = std::min(k + 1, n - 1);
    for (std::size_t i = lo; i <= hi; ++i)
      for (std::size_t l = i; l <= hi; ++l) h.add(i, l, 2.0 * stiff(i, k) * stiff(k, l) / weights[k]);
  }
  for (std::size_t j = 0; j < K; ++j) {
    const double r = p.pressure_scale() * e * (e + 1.0) * std::pow(z[j], e + 2.0) /
                     (s.grid().cell_widths()[j] * s.grid().cell_widths()[j]);
    const double c = 2.0 * r * (g[j] / weights[j] - g[j + 1] / weights[j + 1]);
    h.add(j, j, c);
    h.add(j + 1, j + 1, c);
    h.add(j, j + 1, -c);
  }
  h.add_diagonal(weights, p.lambda());
  return h;
}

namespace {

// Columns e_j - e_{j+1}.
Eigen::MatrixXd difference_columns(std::size_t K) {
  const auto n = static_cast<Eigen::Index>(K + 1);
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(K));
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(K); ++j) {
    v(j, j) = 1.0;
    v(j + 1, j) = -1.0;
  }
  return v;
}

Eigen::VectorXd as_vector(std::span<const double> v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

Eigen::MatrixXd entropy_hessian_dense(const LagrangianState& s, const ModelParams& p) {
  const auto z = s.cell_densities();
  const auto q = pressure_stiffness(z, s.grid().cell_widths(), p);
  const Eigen::MatrixXd v = difference_columns(z.size());
  Eigen::MatrixXd h = v * as_vector(q).asDiagonal() * v.transpose();
  h.diagonal() += p.convexity_modulus() * as_vector(s.grid().node_weights());
  return h;
}

Eigen::MatrixXd information_hessian_dense(const LagrangianState& s, const ModelParams& p) {
  const auto z = s.cell_densities();
  const auto widths = s.grid().cell_widths();
  const std::size_t K = z.size();
  const double e = p.pressure_exponent();
  const Eigen::VectorXd weights = as_vector(s.grid().node_weights());
  const Eigen::MatrixXd v = difference_columns(K);

  Eigen::VectorXd q(static_cast<Eigen::Index>(K)), r(static_cast<Eigen::Index>(K)),
      pz(static_cast<Eigen::Index>(K));
  for (std::size_t j = 0; j < K; ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    q(i) = p.pressure_scale() * e * std::pow(z[j], e + 1.0) / widths[j];
    r(i) = p.pressure_scale() * e * (e + 1.0) * std::pow(z[j], e + 2.0) / (widths[j] * widths[j]);
    pz(i) = p.pressure(z[j]);
  }
  const Eigen::MatrixXd stiff = v * q.asDiagonal() * v.transpose();
  const Eigen::VectorXd w = (v * pz).cwiseQuotient(weights);
  const Eigen::VectorXd dw = v.transpose() * w;

  Eigen::MatrixXd h = 2.0 * stiff * weights.cwiseInverse().asDiagonal() * stiff;
  h += 2.0 * v * r.cwiseProduct(dw).asDiagonal() * v.transpose();
  h.diagonal() += p.lambda() * weights;
  // products above round asymmetrically
  return 0.5 * (h + h.transpose());
}

double check_entropy_information_relation(const LagrangianState& s, const ModelParams& p) {
  const double F = information(s, p).value();
  const auto grad = entropy_gradient(s, p);
  const double slope = inner_product(grad.metric, grad.metric, s.grid());
  const double rhs = p.logarithmic() ? slope + p.convexity_modulus() * s.grid().total_mass()
                                     : slope + (2.0 * p.alpha() - 1.0) * p.convexity_modulus() * entropy(s, p).value();
  return std::abs(F - rhs) / std::max(1.0, std::abs(F));
}

double total_variation(std::span<const double> values) {
  if (values.empty()) return 0.0;
  CompensatedSum acc;
  acc += std::abs(values.front());
  acc += std::abs(values.back());
  for (std::size_t j = 0; j + 1 < values.size(); ++j) acc += std::abs(values[j + 1] - values[j]);
  return acc.value();
}

double total_variation(const PiecewiseConstantDensity& u) { return total_variation(u.values()); }

std::vector<double> pressure_values(const PiecewiseConstantDensity& u, const ModelParams& p) {
  std::vector<double> out(u.cells());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = p.pressure(u.values()[j]);
  return out;
}

}  // namespace lagflow
