#include "lagflow/mass_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

#include "lagflow/quadrature.hpp"
#include "lagflow/summation.hpp"

namespace lagflow {

MassGrid MassGrid::uniform(std::size_t cells, double total_mass) {
  if (cells == 0) throw std::invalid_argument("mass grid needs at least one cell");
  if (!(total_mass > 0.0) || !std::isfinite(total_mass))
    throw std::invalid_argument("total mass must be positive and finite");

  MassGrid g;
  g.uniform_ = true;
  g.total_mass_ = total_mass;
  const double width = total_mass / static_cast<double>(cells);
  g.mass_nodes_.resize(cells + 1);
  for (std::size_t k = 0; k < cells; ++k) g.mass_nodes_[k] = static_cast<double>(k) * width;
  g.mass_nodes_[cells] = total_mass;
  g.cell_widths_.assign(cells, width);
  g.node_weights_.assign(cells + 1, width);
  return g;
}

MassGrid MassGrid::nonuniform(std::vector<double> mass_nodes) {
  if (mass_nodes.size() < 2) throw std::invalid_argument("mass grid needs at least two nodes");
  if (mass_nodes.front() != 0.0) throw std::invalid_argument("first mass node must be 0");
  for (std::size_t k = 0; k + 1 < mass_nodes.size(); ++k) {
    if (!std::isfinite(mass_nodes[k + 1]) || !(mass_nodes[k + 1] > mass_nodes[k]))
      throw std::invalid_argument(fmt::format("mass nodes not strictly increasing at index {}", k + 1));
  }

  MassGrid g;
  g.uniform_ = false;
  const std::size_t K = mass_nodes.size() - 1;
  g.total_mass_ = mass_nodes.back();
  g.cell_widths_.resize(K);
  for (std::size_t j = 0; j < K; ++j) g.cell_widths_[j] = mass_nodes[j + 1] - mass_nodes[j];
  g.node_weights_.resize(K + 1);
  g.node_weights_[0] = 0.5 * mass_nodes[1];
  g.node_weights_[K] = 0.5 * (g.total_mass_ - mass_nodes[K - 1]);
  for (std::size_t k = 1; k < K; ++k) g.node_weights_[k] = 0.5 * (mass_nodes[k + 1] - mass_nodes[k - 1]);
  g.mass_nodes_ = std::move(mass_nodes);
  return g;
}

double MassGrid::uniform_width() const {
  if (!uniform_) throw std::logic_error("grid is not uniform");
  return cell_widths_.front();
}

double MassGrid::min_node_weight() const {
  return *std::min_element(node_weights_.begin(), node_weights_.end());
}

LagrangianState::LagrangianState(GridPtr grid, std::vector<double> positions)
    : grid_(std::move(grid)), x_(std::move(positions)) {
  if (!grid_) throw std::invalid_argument("state needs a grid");
  if (x_.size() != grid_->nodes())
    throw std::invalid_argument(
        fmt::format("state has {} positions, grid has {} nodes", x_.size(), grid_->nodes()));
  for (std::size_t k = 0; k < x_.size(); ++k) {
    if (!std::isfinite(x_[k])) throw std::invalid_argument(fmt::format("position {} is not finite", k));
    if (k > 0 && !(x_[k] > x_[k - 1]))
      throw std::invalid_argument(fmt::format("positions not strictly increasing at index {}", k));
  }
}

std::vector<double> LagrangianState::cell_densities() const {
  const auto widths = grid_->cell_widths();
  std::vector<double> z(widths.size());
  for (std::size_t j = 0; j < z.size(); ++j) z[j] = widths[j] / (x_[j + 1] - x_[j]);
  return z;
}

double LagrangianState::max_abs_position() const {
  return std::max(std::abs(x_.front()), std::abs(x_.back()));
}

bool same_grid(const LagrangianState& a, const LagrangianState& b) {
  return a.grid_ptr() == b.grid_ptr() || a.grid() == b.grid();
}

void require_same_grid(const LagrangianState& a, const LagrangianState& b) {
  if (!same_grid(a, b)) throw std::invalid_argument("states live on different mass grids");
}

PiecewiseConstantDensity::PiecewiseConstantDensity(std::vector<double> breakpoints,
                                                   std::vector<double> values)
    : x_(std::move(breakpoints)), z_(std::move(values)) {
  if (z_.empty() || x_.size() != z_.size() + 1)
    throw std::invalid_argument("piecewise-constant density needs K values and K+1 breakpoints");
  for (std::size_t j = 0; j < z_.size(); ++j) {
    if (!(x_[j + 1] > x_[j])) throw std::invalid_argument("breakpoints not strictly increasing");
    if (!(z_[j] >= 0.0) || !std::isfinite(z_[j]))
      throw std::invalid_argument("density values must be finite and non-negative");
  }
}

double PiecewiseConstantDensity::operator()(double x) const {
  if (!(x > x_.front()) || x > x_.back()) return 0.0;
  const auto it = std::lower_bound(x_.begin(), x_.end(), x);
  return z_[static_cast<std::size_t>(it - x_.begin()) - 1];
}

double PiecewiseConstantDensity::mass() const {
  CompensatedSum m;
  for (std::size_t j = 0; j < z_.size(); ++j) m += z_[j] * (x_[j + 1] - x_[j]);
  return m.value();
}

AffineInterpolant::AffineInterpolant(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() < 2 || knots_.size() != values_.size())
    throw std::invalid_argument("affine interpolant needs matching knots and values");
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i)
    if (!(knots_[i + 1] > knots_[i])) throw std::invalid_argument("knots not strictly increasing");
}

double AffineInterpolant::operator()(double x) const {
  if (x < knots_.front() || x > knots_.back()) return 0.0;
  if (x == knots_.back()) return values_.back();
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  const double s = (x - knots_[i]) / (knots_[i + 1] - knots_[i]);
  return values_[i] + s * (values_[i + 1] - values_[i]);
}

double AffineInterpolant::derivative(double x) const {
  if (x < knots_.front() || x >= knots_.back()) return 0.0;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  return (values_[i + 1] - values_[i]) / (knots_[i + 1] - knots_[i]);
}

double AffineInterpolant::h1_seminorm_squared() const {
  CompensatedSum acc;
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    const double dv = values_[i + 1] - values_[i];
    acc += dv * dv / (knots_[i + 1] - knots_[i]);
  }
  return acc.value();
}

namespace {

struct CumulativeTable {
  std::vector<double> points;  // subinterval endpoints
  std::vector<double> mass;    // cumulative mass at each endpoint
};

CumulativeTable tabulate(const DensitySampler& u0, std::size_t cells) {
  const double a = u0.support_left, b = u0.support_right;
  std::vector<double> cuts{a};
  for (double p : u0.breakpoints)
    if (p > a && p < b) cuts.push_back(p);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const std::size_t target = std::max<std::size_t>(64, 4 * cells);
  CumulativeTable t;
  t.points.push_back(a);
  t.mass.push_back(0.0);
  CompensatedSum acc;
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double lo = cuts[s], hi = cuts[s + 1];
    const auto n = std::max<std::size_t>(
        4, static_cast<std::size_t>(std::ceil(static_cast<double>(target) * (hi - lo) / (b - a))));
    for (std::size_t i = 0; i < n; ++i) {
      const double l = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
      const double r = (i + 1 == n) ? hi : lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(n);
      for (double probe : {l, 0.5 * (l + r), r}) {
        const double v = u0.density(probe);
        if (!std::isfinite(v) || v < 0.0)
          throw std::invalid_argument(fmt::format("initial density is negative or not finite at x = {}", probe));
      }
      const double m = integrate_piece(u0.density, l, r, 1e-14);
      if (!(m > 0.0))
        throw std::invalid_argument(
            fmt::format("initial density vanishes on [{}, {}]; quantiles are not unique", l, r));
      acc += m;
      t.points.push_back(r);
      t.mass.push_back(acc.value());
    }
  }
  return t;
}

}  // namespace

LagrangianState build_initial_vector(const DensitySampler& u0, GridPtr grid, double mass_tolerance) {
  if (!grid) throw std::invalid_argument("initial vector needs a grid");
  if (!u0.density) throw std::invalid_argument("initial density is empty");
  const double a = u0.support_left, b = u0.support_right;
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
    throw std::invalid_argument("initial density support must be a finite non-empty interval");

  const std::size_t K = grid->cells();
  const CumulativeTable table = tabulate(u0, K);
  const double measured = table.mass.back();
  const double M = grid->total_mass();
  if (std::abs(measured - M) > std::max(mass_tolerance * static_cast<double>(K), 1e-10 * M))
    throw QuantileError(fmt::format("initial density has mass {:.17g}, grid expects {:.17g}", measured, M),
                        measured);

  const auto xi = grid->mass_nodes();
  std::vector<double> x(K + 1);
  x[0] = a;
  x[K] = b;
  const double rescale = M / measured;
  for (std::size_t k = 1; k < K; ++k) {
    const double target = xi[k] / rescale;
    auto it = std::upper_bound(table.mass.begin(), table.mass.end(), target);
    std::size_t i = static_cast<std::size_t>(it - table.mass.begin());
    i = std::clamp<std::size_t>(i, 1, table.points.size() - 1) - 1;
    const double lo = table.points[i], hi = table.points[i + 1];
    const double base = table.mass[i];
    auto residual = [&](double s) { return base + integrate_piece(u0.density, lo, s, 1e-14) - target; };
    double flo = base - target, fhi = table.mass[i + 1] - target;
    if (flo >= 0.0) {
      x[k] = lo;
    } else if (fhi <= 0.0) {
      x[k] = hi;
    } else {
      std::uintmax_t iters = 200;
      const auto bracket = boost::math::tools::toms748_solve(
          residual, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
      x[k] = 0.5 * (bracket.first + bracket.second);
    }
    if (!(x[k] > x[k - 1]))
      throw QuantileError(fmt::format("quantile bracketing failed at node {}", k), measured);
  }
  if (!(x[K] > x[K - 1])) throw QuantileError("quantile bracketing failed at the last node", measured);
  return LagrangianState(std::move(grid), std::move(x));
}

PiecewiseConstantDensity density_from_state(const LagrangianState& s) {
  const auto x = s.positions();
  return PiecewiseConstantDensity(std::vector<double>(x.begin(), x.end()), s.cell_densities());
}

AffineInterpolant affine_interpolant(const LagrangianState& s) {
  const auto x = s.positions();
  const auto z = s.cell_densities();
  const std::size_t K = z.size();
  std::vector<double> knots, values;
  knots.reserve(2 * K + 1);
  values.reserve(2 * K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    const double left = k > 0 ? z[k - 1] : 0.0;
    const double right = k < K ? z[k] : 0.0;
    knots.push_back(x[k]);
    values.push_back(0.5 * (left + right));
    if (k < K) {
      knots.push_back(0.5 * (x[k] + x[k + 1]));
      values.push_back(z[k]);
    }
  }
  return AffineInterpolant(std::move(knots), std::move(values));
}

double lagrangian_map(const LagrangianState& s, double xi) {
  const auto nodes = s.grid().mass_nodes();
  if (!(xi >= 0.0) || xi > s.grid().total_mass())
    throw std::domain_error(fmt::format("mass coordinate {} outside [0, {}]", xi, s.grid().total_mass()));
  if (xi == nodes.back()) return s.back();
  const auto it = std::upper_bound(nodes.begin(), nodes.end(), xi);
  const std::size_t k = static_cast<std::size_t>(it - nodes.begin()) - 1;
  const double w = (xi - nodes[k]) / (nodes[k + 1] - nodes[k]);
  return s[k] + w * (s[k + 1] - s[k]);
}

DensitySampler sampler_from_density(const PiecewiseConstantDensity& u) {
  const auto x = u.breakpoints();
  DensitySampler out;
  out.density = [u](double y) { return u(y); };
  out.support_left = x.front();
  out.support_right = x.back();
  out.breakpoints.assign(x.begin() + 1, x.end() - 1);
  return out;
}

double l1_distance(const PiecewiseConstantDensity& u, const PiecewiseConstantDensity& v) {
  std::vector<double> cuts;
  cuts.reserve(u.breakpoints().size() + v.breakpoints().size());
  cuts.insert(cuts.end(), u.breakpoints().begin(), u.breakpoints().end());
  cuts.insert(cuts.end(), v.breakpoints().begin(), v.breakpoints().end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  CompensatedSum acc;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
    acc += std::abs(u(mid) - v(mid)) * (cuts[i + 1] - cuts[i]);
  }
  return acc.value();
}

}  // namespace lagflow
