#include "lagflow/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "lagflow/summation.hpp"

namespace lagflow {

namespace {

struct Panel {
  double a, b, value, error, l1;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel rule(const std::function<double(double)>& f, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  Panel p{a, b, 0.0, 0.0, 0.0};
  p.value = gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &p.error, &p.l1);
  return p;
}

}  // namespace

// Global adaptive bisection, worst panel first. Stops once the summed error
// estimate is below the tolerance or sits at the roundoff level of |f|.
double integrate_piece(const std::function<double(double)>& f, double a, double b, double rel_tol,
                       double abs_tol) {
  if (!(b > a)) return 0.0;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr std::size_t max_panels = 1000;

  std::priority_queue<Panel> panels;
  panels.push(rule(f, a, b));
  double value = panels.top().value, error = panels.top().error, l1 = panels.top().l1;
  while (panels.size() < max_panels) {
    if (error <= std::max({rel_tol * std::abs(value), 50.0 * eps * l1, abs_tol})) break;
    const Panel worst = panels.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    panels.pop();
    const Panel left = rule(f, worst.a, mid), right = rule(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    panels.push(left);
    panels.push(right);
  }
  CompensatedSum total;
  while (!panels.empty()) {
    total += panels.top().value;
    panels.pop();
  }
  return total.value();
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 std::span<const double> breakpoints, double rel_tol) {
  if (!(b > a)) return 0.0;
  std::vector<double> cuts{a};
  for (double p : breakpoints)
    if (p > a && p < b) cuts.push_back(p);
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  CompensatedSum total;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += integrate_piece(f, cuts[i], cuts[i + 1], rel_tol);
  return total.value();
}

}  // namespace lagflow
