#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's functionals; formulas are written out directly from their
// definitions, in long double where it helps.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

using Vec = std::vector<double>;
using Fn = std::function<long double(const Vec&)>;

inline Vec central_gradient(const Fn& f, const Vec& x, double h) {
  Vec g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    Vec a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = static_cast<double>((f(a) - f(b)) / (2.0L * h));
  }
  return g;
}

// Jacobian of a vector field by central differences, column by column.
inline std::vector<Vec> central_jacobian(const std::function<Vec(const Vec&)>& g, const Vec& x, double h) {
  const std::size_t n = x.size();
  std::vector<Vec> jac(n, Vec(n));
  for (std::size_t j = 0; j < n; ++j) {
    Vec a = x, b = x;
    a[j] += h;
    b[j] -= h;
    const Vec ga = g(a), gb = g(b);
    for (std::size_t i = 0; i < n; ++i) jac[i][j] = (ga[i] - gb[i]) / (2.0 * h);
  }
  return jac;
}

// Second derivatives by the four-point central stencil, in long double.
inline std::vector<Vec> central_hessian(const Fn& f, const Vec& x, double h) {
  const std::size_t n = x.size();
  std::vector<Vec> hess(n, Vec(n));
  auto at = [&](std::size_t i, double si, std::size_t j, double sj) {
    Vec y = x;
    y[i] += si;
    y[j] += sj;
    return f(y);
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const long double num = at(i, h, j, h) - at(i, h, j, -h) - at(i, -h, j, h) + at(i, -h, j, -h);
      hess[i][j] = static_cast<double>(num / (4.0L * h * h));
    }
  return hess;
}

inline bool increasing(const Vec& x) {
  for (std::size_t k = 0; k + 1 < x.size(); ++k)
    if (!(x[k + 1] > x[k])) return false;
  return true;
}

// Grid-refinement search: look at all 5^d points {-2..2} * h around the
// current center, move to the best, halve h when the center wins.
inline Vec grid_refinement_minimize(const Fn& f, Vec x, double h, double h_min,
                                    const std::function<bool(const Vec&)>& feasible = increasing) {
  const std::size_t d = x.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) total *= 5;
  long double best = f(x);
  while (h > h_min) {
    Vec arg = x;
    long double val = best;
    for (std::size_t code = 0; code < total; ++code) {
      Vec y = x;
      std::size_t c = code;
      for (std::size_t i = 0; i < d; ++i) {
        y[i] += (static_cast<double>(c % 5) - 2.0) * h;
        c /= 5;
      }
      if (!feasible(y)) continue;
      const long double v = f(y);
      if (v < val) {
        val = v;
        arg = y;
      }
    }
    if (arg == x) {
      h *= 0.5;
    } else {
      x = arg;
      best = val;
    }
  }
  return x;
}

// Information functional on a uniform grid with node weight delta at every
// node, evaluated straight from its definition.
inline long double information_uniform(const Vec& x, double alpha, double lambda, double delta) {
  const long double theta = std::sqrt(2.0L * alpha) / (2.0L * alpha + 1.0L);
  const long double p = alpha + 0.5L;
  const std::size_t K = x.size() - 1;
  auto P = [&](std::size_t j) -> long double {  // pressure in cell j, zero outside
    if (j >= K) return 0.0L;
    const long double z = delta / (static_cast<long double>(x[j + 1]) - x[j]);
    return std::pow(z, p);
  };
  long double sum = 0.0L, drift = 0.0L;
  for (std::size_t k = 0; k <= K; ++k) {
    const long double left = k > 0 ? P(k - 1) : 0.0L;
    const long double d = (P(k) - left) / delta;
    sum += d * d;
    drift += static_cast<long double>(x[k]) * x[k];
  }
  return theta * theta * delta * sum + 0.5L * lambda * delta * drift;
}

inline long double yosida_uniform(const Vec& x, const Vec& y, double tau, double alpha, double lambda, double delta) {
  long double d2 = 0.0L;
  for (std::size_t k = 0; k < x.size(); ++k) d2 += (static_cast<long double>(x[k]) - y[k]) * (x[k] - y[k]);
  return delta * d2 / (2.0L * tau) + information_uniform(x, alpha, lambda, delta);
}

inline long double entropy_uniform(const Vec& x, double alpha, double lambda, double delta) {
  const long double theta = std::sqrt(2.0L * alpha) / (2.0L * alpha + 1.0L);
  const long double modulus = std::sqrt(lambda / (2.0L * alpha + 1.0L));
  long double sum = 0.0L, drift = 0.0L;
  for (std::size_t j = 0; j + 1 < x.size(); ++j) {
    const long double z = delta / (static_cast<long double>(x[j + 1]) - x[j]);
    sum += alpha == 0.5 ? theta * std::log(z) : theta * std::pow(z, alpha - 0.5L) / (alpha - 0.5L);
  }
  for (double v : x) drift += static_cast<long double>(v) * v;
  return delta * sum + 0.5L * modulus * delta * drift;
}

// Initial density of the first experiment and its exact distribution function.
inline double sine_density(double x) { return 0.25 * std::abs(std::sin(x)) * (0.5 + (x > 0.0 ? 1.0 : 0.0)); }
inline double sine_cdf(double x) {
  if (x <= 0.0) return 0.125 * (1.0 + std::cos(x));
  return 0.25 + 0.375 * (1.0 - std::cos(x));
}

inline double tanh_sinh(const std::function<double(double)>& f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(f, a, b, 1e-14);
}

// Random strictly increasing positions with cell widths spread over a decade.
inline Vec random_positions(std::mt19937_64& rng, std::size_t nodes, double spread = 1.0) {
  std::uniform_real_distribution<double> start(-1.0, 0.0), width(0.1, 1.0);
  Vec x(nodes);
  x[0] = start(rng) * spread;
  for (std::size_t k = 1; k < nodes; ++k) x[k] = x[k - 1] + width(rng) * spread / static_cast<double>(nodes);
  return x;
}

}  // namespace oracle
