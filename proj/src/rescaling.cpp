#include "lagflow/rescaling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lagflow/equilibria.hpp"
#include "lagflow/summation.hpp"

namespace lagflow {

LagrangianState dilate(const LagrangianState& s, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("dilation factor must be positive and finite");
  std::vector<double> x(s.positions().begin(), s.positions().end());
  for (double& v : x) v *= r;
  return LagrangianState(s.grid_ptr(), std::move(x));
}

namespace {

double relative_gap(double lhs, double rhs, double scale) {
  const double denom = std::max({std::abs(lhs), std::abs(rhs), scale});
  return denom == 0.0 ? 0.0 : std::abs(lhs - rhs) / denom;
}

}  // namespace

ScalingResidual check_scaling_identities(const LagrangianState& s, const ModelParams& p, double r) {
  const LagrangianState d = dilate(s, r);
  const double h = entropy(s, p).internal, hr = entropy(d, p).internal;
  const double f = information(s, p).internal, fr = information(d, p).internal;
  ScalingResidual out;
  if (p.logarithmic()) {
    const double shift = p.pressure_scale() * s.grid().total_mass() * std::log(r);
    out.entropy = relative_gap(hr, h - shift, std::max(std::abs(h), std::abs(shift)));
  } else {
    out.entropy = relative_gap(hr, std::pow(r, -(2.0 * p.alpha() - 1.0) / 2.0) * h, std::abs(h));
  }
  out.information = relative_gap(fr, std::pow(r, -(2.0 * p.alpha() + 1.0)) * f, std::abs(f));
  return out;
}

TransferredStep rescaled_minimizing_movement_transfer(double tau, double lambda, double R, double S, double alpha) {
  if (!(tau > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("confinement must be non-negative");
  if (!(S > 0.0) || !(R > S)) throw std::invalid_argument("transfer requires R > S > 0");
  TransferredStep out;
  out.step = tau * S * std::pow(R, 2.0 * alpha + 2.0);
  out.confinement = (S * (1.0 + lambda * tau) - R) / (out.step * R);
  return out;
}

RescaleSchedule::RescaleSchedule(std::vector<double> base_steps, double alpha)
    : alpha_(alpha), base_steps_(std::move(base_steps)) {
  if (!(alpha >= 0.5 && alpha <= 1.0)) throw std::invalid_argument("alpha outside [1/2, 1]");
  const std::size_t N = base_steps_.size();
  base_times_.assign(1, 0.0);
  growth_.assign(1, 1.0);
  scaled_times_.assign(1, 0.0);
  scaled_steps_.reserve(N);
  CompensatedSum t, s;
  for (double tau : base_steps_) {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("base steps must be positive");
    max_step_ = std::max(max_step_, tau);
    const double prev = growth_.back();
    const double next = (1.0 + tau) * prev;
    const double hat = tau * prev * std::pow(next, 2.0 * alpha + 2.0);
    t += tau;
    s += hat;
    growth_.push_back(next);
    scaled_steps_.push_back(hat);
    base_times_.push_back(t.value());
    scaled_times_.push_back(s.value());
  }
}

double RescaleSchedule::time_factor() const { return std::pow(1.0 + max_step_, -(2.0 * alpha_ + 2.0)); }

double RescaleSchedule::exponent_factor() const { return 1.0 + 2.0 * max_step_; }

std::vector<LagrangianState> self_similar_solution(const LagrangianState& profile, const RescaleSchedule& schedule) {
  std::vector<LagrangianState> out;
  out.reserve(schedule.growth().size());
  for (double S : schedule.growth()) out.push_back(dilate(profile, S));
  return out;
}

std::vector<LagrangianState> self_similar_solution(double alpha, GridPtr grid, const RescaleSchedule& schedule) {
  const ModelParams unit(alpha, 1.0);
  return self_similar_solution(discrete_minimizer(unit, std::move(grid)), schedule);
}

double continuous_rescale_factor(double t, double alpha) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be non-negative");
  const double e = 2.0 * alpha + 3.0;
  return std::pow(1.0 + e * t, 1.0 / e);
}

double discrete_decay_factor(double t, double tau, double alpha) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be non-negative");
  if (!(tau >= 0.0)) throw std::invalid_argument("step must be non-negative");
  const double e = 2.0 * alpha + 3.0;
  const double a = std::pow(1.0 + tau, -(2.0 * alpha + 2.0));
  const double b = 1.0 + 2.0 * tau;
  return std::pow(1.0 + a * e * t, 1.0 / (b * e));
}

double discrete_decay_factor(std::size_t n, const RescaleSchedule& schedule) {
  if (n >= schedule.scaled_times().size()) throw std::out_of_range("step index beyond the schedule");
  return discrete_decay_factor(schedule.scaled_times()[n], schedule.max_step(), schedule.alpha());
}

}  // namespace lagflow
