#include "lagflow/banded.hpp"

#include <cmath>
#include <stdexcept>

#include <lapacke.h>

namespace lagflow {

SymmetricBand::SymmetricBand(std::size_t n, std::size_t bandwidth) : n_(n), bw_(bandwidth) {
  if (n == 0) throw std::invalid_argument("band matrix must be non-empty");
  diags_.resize(bw_ + 1);
  for (std::size_t d = 0; d <= bw_; ++d) diags_[d].assign(d < n ? n - d : 0, 0.0);
}

double SymmetricBand::operator()(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  const std::size_t d = j - i;
  return d <= bw_ ? diags_[d][i] : 0.0;
}

void SymmetricBand::add(std::size_t i, std::size_t j, double v) {
  if (i > j) std::swap(i, j);
  const std::size_t d = j - i;
  if (d > bw_ || j >= n_) throw std::out_of_range("entry outside the band");
  diags_[d][i] += v;
}

void SymmetricBand::add_diagonal(std::span<const double> d, double scale) {
  for (std::size_t i = 0; i < n_; ++i) diags_[0][i] += scale * d[i];
}

std::vector<double> SymmetricBand::multiply(std::span<const double> v) const {
  std::vector<double> out(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) out[i] = diags_[0][i] * v[i];
  for (std::size_t d = 1; d <= bw_ && d < n_; ++d) {
    for (std::size_t i = 0; i + d < n_; ++i) {
      out[i] += diags_[d][i] * v[i + d];
      out[i + d] += diags_[d][i] * v[i];
    }
  }
  return out;
}

std::vector<double> SymmetricBand::abs_multiply(std::span<const double> v) const {
  std::vector<double> out(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) out[i] = std::abs(diags_[0][i] * v[i]);
  for (std::size_t d = 1; d <= bw_ && d < n_; ++d) {
    for (std::size_t i = 0; i + d < n_; ++i) {
      out[i] += std::abs(diags_[d][i] * v[i + d]);
      out[i + d] += std::abs(diags_[d][i] * v[i]);
    }
  }
  return out;
}

Eigen::MatrixXd SymmetricBand::to_dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
  for (std::size_t d = 0; d <= bw_ && d < n_; ++d) {
    for (std::size_t i = 0; i + d < n_; ++i) {
      const auto r = static_cast<Eigen::Index>(i), c = static_cast<Eigen::Index>(i + d);
      a(r, c) = diags_[d][i];
      a(c, r) = diags_[d][i];
    }
  }
  return a;
}

bool SymmetricBand::solve(std::span<const double> rhs, std::vector<double>& out) const {
  const auto n = static_cast<lapack_int>(n_);
  const auto kl = static_cast<lapack_int>(std::min(bw_, n_ - 1));
  const lapack_int ku = kl;
  const lapack_int ldab = 2 * kl + ku + 1;
  std::vector<double> ab(static_cast<std::size_t>(ldab) * n_, 0.0);
  for (lapack_int j = 0; j < n; ++j) {
    const lapack_int lo = std::max<lapack_int>(0, j - ku), hi = std::min<lapack_int>(n - 1, j + kl);
    for (lapack_int i = lo; i <= hi; ++i)
      ab[static_cast<std::size_t>(kl + ku + i - j + j * ldab)] =
          (*this)(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  out.assign(rhs.begin(), rhs.end());
  std::vector<lapack_int> ipiv(n_);
  const lapack_int info = LAPACKE_dgbsv(LAPACK_COL_MAJOR, n, kl, ku, 1, ab.data(), ldab, ipiv.data(), out.data(), n);
  if (info != 0) return false;
  for (double v : out)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace lagflow
