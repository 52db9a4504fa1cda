#include "lagflow/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <fmt/format.h>

#include "lagflow/quadrature.hpp"
#include "lagflow/summation.hpp"

namespace lagflow {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

EquilibriumProfile::EquilibriumProfile(const ModelParams& p) : params_(p) {
  if (!(p.lambda() > 0.0)) throw std::domain_error("no integrable equilibrium without confinement");
  modulus_ = p.convexity_modulus();
  if (p.logarithmic()) {
    gaussian_ = true;
    curvature_ = modulus_;
    height_ = std::sqrt(modulus_ / std::numbers::pi);
  } else {
    const double e = p.alpha() - 0.5;
    exponent_ = 1.0 / e;
    curvature_ = e * modulus_ / std::sqrt(2.0 * p.alpha());
    // a^{m+1/2} b^{-1/2} B(1/2, m+1) = 1
    const double B = boost::math::beta(0.5, exponent_ + 1.0);
    height_ = std::pow(std::sqrt(curvature_) / B, 1.0 / (exponent_ + 0.5));
  }
}

double EquilibriumProfile::support_radius() const {
  return gaussian_ ? kInf : scale_ * std::sqrt(height_ / curvature_);
}

double EquilibriumProfile::operator()(double x) const {
  const double y = x / scale_;
  if (gaussian_) return height_ * std::exp(-curvature_ * y * y) / scale_;
  if (std::abs(x) >= support_radius()) return 0.0;
  const double base = height_ - curvature_ * y * y;
  if (base <= 0.0) return 0.0;
  return std::pow(base, exponent_) / scale_;
}

double EquilibriumProfile::cdf(double x) const {
  const double y = x / scale_;
  if (gaussian_) return 0.5 * std::erfc(-y * std::sqrt(curvature_));
  const double R = std::sqrt(height_ / curvature_);
  if (y <= -R) return 0.0;
  if (y >= R) return 1.0;
  return boost::math::ibeta(exponent_ + 1.0, exponent_ + 1.0, 0.5 * (1.0 + y / R));
}

double EquilibriumProfile::quantile(double mass) const {
  if (!(mass >= 0.0 && mass <= 1.0)) throw std::domain_error(fmt::format("mass {} outside [0, 1]", mass));
  if (gaussian_) {
    if (mass == 0.0) return -kInf;
    if (mass == 1.0) return kInf;
    return -scale_ * boost::math::erfc_inv(2.0 * mass) / std::sqrt(curvature_);
  }
  const double R = std::sqrt(height_ / curvature_);
  if (mass == 0.5) return 0.0;
  if (mass > 0.5) return -quantile(1.0 - mass);
  // ibeta_inv occasionally gives up for integer shapes; bracket on [0, 1/2] instead.
  const double shape = exponent_ + 1.0;
  auto excess = [&](double t) { return boost::math::ibeta(shape, shape, t) - mass; };
  if (mass == 0.0) return -scale_ * R;
  boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 1);
  std::uintmax_t iters = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(excess, 0.0, 0.5, -mass, 0.5 - mass, tol, iters);
  return scale_ * R * (lo + hi - 1.0);
}

double EquilibriumProfile::mass() const {
  auto f = [this](double x) { return (*this)(x); };
  if (gaussian_) {
    const double w = 40.0 * scale_ / std::sqrt(curvature_);
    const double cuts[] = {0.0};
    return integrate(f, -w, w, cuts);
  }
  const double R = support_radius();
  const double cuts[] = {0.0};
  return integrate(f, -R, R, cuts);
}

double EquilibriumProfile::entropy() const {
  const double theta = params_.pressure_scale();
  if (gaussian_) return theta * (std::log(height_ / scale_) - 0.5) + scale_ * scale_ / 4.0;
  auto f = [this](double x) {
    const double u = (*this)(x);
    return params_.entropy_integrand(u) + 0.5 * modulus_ * x * x * u;
  };
  const double R = support_radius();
  const double cuts[] = {0.0};
  return integrate(f, -R, R, cuts);
}

EquilibriumProfile EquilibriumProfile::dilated(double r) const {
  if (!(r > 0.0)) throw std::invalid_argument("dilation factor must be positive");
  EquilibriumProfile out = *this;
  out.scale_ *= r;
  return out;
}

EquilibriumProfile reference_profile(const ModelParams& p) { return EquilibriumProfile(p); }

namespace {

double metric_norm_of_partial(std::span<const double> g, const MassGrid& grid) {
  const auto w = grid.node_weights();
  CompensatedSum acc;
  for (std::size_t k = 0; k < g.size(); ++k) acc += g[k] * g[k] / w[k];
  return std::sqrt(acc.value());
}

double gradient_floor(const LagrangianState& x, const ModelParams& p) {
  std::vector<double> ax(x.nodes());
  for (std::size_t k = 0; k < ax.size(); ++k) ax[k] = std::abs(x[k]);
  return 32.0 * kEps * metric_norm_of_partial(entropy_hessian(x, p).abs_multiply(ax), x.grid());
}

std::vector<double> quantile_guess(const EquilibriumProfile& prof, const MassGrid& grid) {
  const auto xi = grid.mass_nodes();
  const std::size_t K = grid.cells();
  std::vector<double> x(K + 1);
  if (K == 1) {
    x[0] = prof.quantile(0.25);
    x[1] = prof.quantile(0.75);
    return x;
  }
  x[0] = prof.quantile(0.5 * grid.cell_widths().front());
  x[K] = prof.quantile(1.0 - 0.5 * grid.cell_widths().back());
  for (std::size_t k = 1; k < K; ++k) x[k] = prof.quantile(xi[k]);
  return x;
}

bool newton_on_entropy(LagrangianState& x, const ModelParams& p, const MinimizerConfig& cfg) {
  const GridPtr grid = x.grid_ptr();
  const std::size_t n = x.nodes();
  double value = entropy(x, p).value();
  auto g = entropy_gradient(x, p).partial;
  double res = metric_norm_of_partial(g, *grid);

  for (int it = 0; it < cfg.max_iterations; ++it) {
    if (res <= std::max(cfg.tolerance, gradient_floor(x, p))) return true;
    const auto h = entropy_hessian(x, p);
    std::vector<double> rhs(n), d;
    for (std::size_t k = 0; k < n; ++k) rhs[k] = -g[k];
    if (!h.solve(rhs, d)) return false;
    double slope = 0.0;
    for (std::size_t k = 0; k < n; ++k) slope += g[k] * d[k];
    if (!(slope < 0.0)) return false;

    const double noise = 64.0 * kEps * (std::abs(value) + 1.0);
    bool accepted = false;
    for (double theta = 1.0; theta >= 0x1p-40; theta *= 0.5) {
      std::vector<double> trial(n);
      for (std::size_t k = 0; k < n; ++k) trial[k] = x[k] + theta * d[k];
      bool mono = true;
      for (std::size_t k = 0; k + 1 < n; ++k)
        if (!(trial[k + 1] > trial[k])) mono = false;
      if (!mono) continue;
      LagrangianState cand(grid, std::move(trial));
      const double cv = entropy(cand, p).value();
      auto cg = entropy_gradient(cand, p).partial;
      const double cr = metric_norm_of_partial(cg, *grid);
      const bool armijo = cv <= value + 1e-4 * theta * slope;
      if (!armijo && !(cv <= value + noise && cr < res)) continue;
      x = std::move(cand);
      value = cv;
      g = std::move(cg);
      res = cr;
      accepted = true;
      break;
    }
    if (!accepted) return false;
  }
  return res <= std::max(cfg.tolerance, gradient_floor(x, p));
}

}  // namespace

LagrangianState discrete_minimizer(const ModelParams& p, GridPtr grid, const MinimizerConfig& cfg) {
  if (!(p.lambda() > 0.0)) throw std::domain_error("the entropy has no minimizer without confinement");
  if (std::abs(grid->total_mass() - 1.0) > 1e-14) throw std::invalid_argument("minimizer requires unit mass");
  const EquilibriumProfile prof(p);
  const auto guess = quantile_guess(prof, *grid);

  LagrangianState x(grid, guess);
  if (newton_on_entropy(x, p, cfg)) return x;

  // Retry from a guess blended with equal spacing.
  const std::size_t K = grid->cells();
  std::vector<double> blend(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    const double even = guess.front() + (guess.back() - guess.front()) * static_cast<double>(k) / static_cast<double>(K);
    blend[k] = 0.5 * (guess[k] + even);
  }
  LagrangianState y(grid, std::move(blend));
  if (newton_on_entropy(y, p, cfg)) return y;
  throw std::runtime_error(fmt::format("entropy minimization failed for K = {}", K));
}

EquilibriumLevels equilibrium_levels(const LagrangianState& x_min, const ModelParams& p) {
  return {entropy(x_min, p).value(), information(x_min, p).value()};
}

namespace {

// Points where the profile equals level c.
void add_level_crossings(const EquilibriumProfile& ref, double c, std::vector<double>& cuts) {
  if (!(c > 0.0)) return;
  const double r = ref.scale();
  const double target = c * r;
  double y2 = -1.0;
  if (ref.gaussian()) {
    if (target < ref.height()) y2 = std::log(ref.height() / target) / ref.curvature();
  } else {
    const double root = std::pow(target, 1.0 / ref.exponent());
    if (root < ref.height()) y2 = (ref.height() - root) / ref.curvature();
  }
  if (y2 > 0.0) {
    const double y = r * std::sqrt(y2);
    cuts.push_back(-y);
    cuts.push_back(y);
  }
}

}  // namespace

double lp_error(const PiecewiseConstantDensity& u, const EquilibriumProfile& ref, double exponent) {
  if (!(exponent >= 1.0)) throw std::invalid_argument("Lp exponent must be at least 1");
  const auto x = u.breakpoints();
  const auto z = u.values();
  std::vector<double> cuts(x.begin(), x.end());
  cuts.push_back(0.0);
  double lo = x.front(), hi = x.back();
  if (!ref.gaussian()) {
    const double R = ref.support_radius();
    cuts.push_back(-R);
    cuts.push_back(R);
    lo = std::min(lo, -R);
    hi = std::max(hi, R);
  }
  for (double c : z) add_level_crossings(ref, c, cuts);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  CompensatedSum acc;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b <= lo || a >= hi) continue;
    const double c = u(0.5 * (a + b));
    // c - ref(s) cancels near level crossings; its rounding sets the floor
    const double top = std::max({c, ref(a), ref(b), (a < 0.0 && b > 0.0) ? ref(0.0) : 0.0});
    const double noise = 64.0 * kEps * std::pow(top, exponent) * (b - a);
    acc += integrate_piece([&](double s) { return std::pow(std::abs(c - ref(s)), exponent); }, a, b, 1e-14, noise);
  }
  if (ref.gaussian()) {
    const double r = ref.scale();
    const double k = std::sqrt(exponent * ref.curvature()) / r;
    const double pre = std::pow(ref.height() / r, exponent) * 0.5 * std::sqrt(std::numbers::pi) / k;
    acc += pre * std::erfc(x.back() * k);
    acc += pre * std::erfc(-x.front() * k);
  }
  return std::pow(acc.value(), 1.0 / exponent);
}

namespace {

// Supremum of the profile on the open half-lines outside [left, right].
double outside_sup(const EquilibriumProfile& ref, double left, double right) {
  const double l = left <= 0.0 ? ref(left) : ref(0.0);
  const double r = right >= 0.0 ? ref(right) : ref(0.0);
  return std::max(l, r);
}

}  // namespace

double linf_error(const PiecewiseConstantDensity& u, const EquilibriumProfile& ref) {
  const auto x = u.breakpoints();
  const auto z = u.values();
  double worst = outside_sup(ref, x.front(), x.back());
  for (std::size_t j = 0; j < z.size(); ++j) {
    const double a = ref(x[j]), b = ref(x[j + 1]);
    const double top = (x[j] < 0.0 && x[j + 1] > 0.0) ? ref(0.0) : std::max(a, b);
    const double bottom = std::min(a, b);
    worst = std::max({worst, std::abs(z[j] - top), std::abs(z[j] - bottom)});
  }
  return worst;
}

double uniform_error(const AffineInterpolant& u, const EquilibriumProfile& ref) {
  const auto knots = u.knots();
  double worst = outside_sup(ref, knots.front(), knots.back());
  constexpr int samples = 32;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    for (int s = 0; s <= samples; ++s) {
      const double t = knots[i] + (knots[i + 1] - knots[i]) * s / samples;
      worst = std::max(worst, std::abs(u(t) - ref(t)));
    }
  }
  std::vector<double> extra{0.0};
  if (!ref.gaussian()) {
    extra.push_back(-ref.support_radius());
    extra.push_back(ref.support_radius());
  }
  for (double t : extra) worst = std::max(worst, std::abs(u(t) - ref(t)));
  return worst;
}

ConvergenceRow convergence_row(const ModelParams& p, std::size_t cells) {
  const auto grid = make_uniform_grid(cells);
  const auto xmin = discrete_minimizer(p, grid);
  const auto u = density_from_state(xmin);
  const auto prof = reference_profile(p);
  ConvergenceRow row;
  row.cells = cells;
  row.l1 = lp_error(u, prof, 1.0);
  row.l2 = lp_error(u, prof, 2.0);
  row.linf = linf_error(u, prof);
  row.entropy_gap = entropy(xmin, p).value() - prof.entropy();
  return row;
}

std::vector<ConvergenceRow> convergence_study(const ModelParams& p, const std::vector<std::size_t>& cells,
                                              bool parallel) {
  std::vector<ConvergenceRow> rows;
  rows.reserve(cells.size());
  if (!parallel) {
    for (std::size_t K : cells) rows.push_back(convergence_row(p, K));
    return rows;
  }
  std::vector<std::future<ConvergenceRow>> jobs;
  for (std::size_t K : cells) jobs.push_back(std::async(std::launch::async, convergence_row, p, K));
  for (auto& j : jobs) rows.push_back(j.get());
  return rows;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace lagflow
