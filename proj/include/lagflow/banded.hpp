#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace lagflow {

/// Symmetric band matrix stored by diagonals: diag(d)[i] = A(i, i+d).
class SymmetricBand {
 public:
  SymmetricBand(std::size_t n, std::size_t bandwidth);

  std::size_t size() const { return n_; }
  std::size_t bandwidth() const { return bw_; }

  double operator()(std::size_t i, std::size_t j) const;
  /// Adds v to A(i,j) and A(j,i) (once on the diagonal).
  void add(std::size_t i, std::size_t j, double v);
  void add_diagonal(std::span<const double> d, double scale = 1.0);

  std::vector<double> multiply(std::span<const double> v) const;
  /// Entrywise |A| applied to v.
  std::vector<double> abs_multiply(std::span<const double> v) const;
  Eigen::MatrixXd to_dense() const;

  /// Solves A x = rhs by banded LU with partial pivoting. Returns false if
  /// the factorization hits an exactly singular pivot.
  bool solve(std::span<const double> rhs, std::vector<double>& out) const;

 private:
  std::size_t n_;
  std::size_t bw_;
  std::vector<std::vector<double>> diags_;
};

}  // namespace lagflow
