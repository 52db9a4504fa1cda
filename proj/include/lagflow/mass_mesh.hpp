#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lagflow {

/// Decomposition of the mass interval [0, M] into K cells.
///
/// Cell widths are indexed by half-integers in the math (kappa = 1/2, ...,
/// K-1/2); here cell j carries the mass between nodes j and j+1. Node
/// weights are the lumped masses used by the discrete inner product.
class MassGrid {
 public:
  static MassGrid uniform(std::size_t cells, double total_mass = 1.0);

  /// Grid from mass nodes 0 = xi_0 < xi_1 < ... < xi_K = M.
  /// Boundary node weights are half of the adjacent cell width.
  static MassGrid nonuniform(std::vector<double> mass_nodes);

  std::size_t cells() const { return cell_widths_.size(); }
  std::size_t nodes() const { return node_weights_.size(); }
  double total_mass() const { return total_mass_; }
  bool is_uniform() const { return uniform_; }

  /// Common cell width delta; throws for non-uniform grids.
  double uniform_width() const;

  std::span<const double> cell_widths() const { return cell_widths_; }
  std::span<const double> node_weights() const { return node_weights_; }
  std::span<const double> mass_nodes() const { return mass_nodes_; }
  double min_node_weight() const;

  bool operator==(const MassGrid& other) const = default;

 private:
  MassGrid() = default;

  bool uniform_ = true;
  double total_mass_ = 0.0;
  std::vector<double> mass_nodes_;
  std::vector<double> cell_widths_;
  std::vector<double> node_weights_;
};

using GridPtr = std::shared_ptr<const MassGrid>;

inline GridPtr make_uniform_grid(std::size_t cells, double total_mass = 1.0) {
  return std::make_shared<const MassGrid>(MassGrid::uniform(cells, total_mass));
}

/// One Lagrangian snapshot: strictly increasing node positions x_0 < ... < x_K.
class LagrangianState {
 public:
  LagrangianState(GridPtr grid, std::vector<double> positions);

  const MassGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::span<const double> positions() const { return x_; }
  std::size_t nodes() const { return x_.size(); }
  std::size_t cells() const { return x_.size() - 1; }
  double operator[](std::size_t k) const { return x_[k]; }
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

  /// Cell densities z_j = delta_j / (x_{j+1} - x_j).
  std::vector<double> cell_densities() const;

  double max_abs_position() const;

 private:
  GridPtr grid_;
  std::vector<double> x_;
};

bool same_grid(const LagrangianState& a, const LagrangianState& b);
void require_same_grid(const LagrangianState& a, const LagrangianState& b);

/// Piecewise-constant density, value z_j on the half-open cell (x_j, x_{j+1}].
class PiecewiseConstantDensity {
 public:
  PiecewiseConstantDensity(std::vector<double> breakpoints, std::vector<double> values);

  std::span<const double> breakpoints() const { return x_; }
  std::span<const double> values() const { return z_; }
  std::size_t cells() const { return z_.size(); }

  double operator()(double x) const;
  /// Exact integral sum_j z_j (x_{j+1} - x_j), compensated summation.
  double mass() const;

 private:
  std::vector<double> x_;
  std::vector<double> z_;
};

/// Continuous piecewise-affine interpolant of a Lagrangian density on [x_0, x_K].
///
/// Knots are the nodes x_k and the cell midpoints. Midpoint values are the
/// cell densities; node values average the two neighbouring cells, with zero
/// assumed outside the support. The function vanishes outside [x_0, x_K].
class AffineInterpolant {
 public:
  AffineInterpolant(std::vector<double> knots, std::vector<double> values);

  std::span<const double> knots() const { return knots_; }
  std::span<const double> knot_values() const { return values_; }
  double operator()(double x) const;
  /// Slope on the segment containing x (0 outside the support).
  double derivative(double x) const;
  /// Squared H^1 seminorm, integral of (u')^2 over the support.
  double h1_seminorm_squared() const;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

/// Density sampler with compact support [a, b] and known interior kinks or
/// jumps, used to build initial data.
struct DensitySampler {
  std::function<double(double)> density;
  double support_left = 0.0;
  double support_right = 1.0;
  std::vector<double> breakpoints;
};

class QuantileError : public std::runtime_error {
 public:
  QuantileError(const std::string& what, double measured_mass)
      : std::runtime_error(what), measured_mass_(measured_mass) {}
  double measured_mass() const { return measured_mass_; }

 private:
  double measured_mass_;
};

/// Mass-quantile nodes of u0: x_0 = a, x_K = b, and every cell carries its
/// share of mass. Tolerance is absolute on the mass per cell.
LagrangianState build_initial_vector(const DensitySampler& u0, GridPtr grid,
                                     double mass_tolerance = 1e-12);

PiecewiseConstantDensity density_from_state(const LagrangianState& s);
AffineInterpolant affine_interpolant(const LagrangianState& s);

/// Piecewise-affine Lagrangian map X with X(xi_k) = x_k.
double lagrangian_map(const LagrangianState& s, double xi);

/// Sampler view of a piecewise-constant density (for round trips).
DensitySampler sampler_from_density(const PiecewiseConstantDensity& u);

/// Exact L1 distance between two piecewise-constant densities.
double l1_distance(const PiecewiseConstantDensity& u, const PiecewiseConstantDensity& v);

}  // namespace lagflow
