#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rankspec/stepfn.hpp"

namespace rankspec {

// Relative threshold below which a singular value counts as zero.
inline constexpr double kRankTol = 1e-9;

struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense square real matrix, row-major.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(int dim) : dim_(dim), data_(static_cast<std::size_t>(dim) * dim, 0.0) {
    if (dim < 0) throw std::invalid_argument("Matrix: negative dimension");
  }

  static Matrix identity(int dim) {
    Matrix m(dim);
    for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  int dim() const { return dim_; }

  double& operator()(int r, int c) { return data_[idx(r, c)]; }
  double operator()(int r, int c) const { return data_[idx(r, c)]; }

  const std::vector<double>& data() const { return data_; }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  Matrix transposed() const {
    Matrix t(dim_);
    for (int r = 0; r < dim_; ++r)
      for (int c = 0; c < dim_; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  friend Matrix operator+(const Matrix& a, const Matrix& b) {
    check_dims(a, b);
    Matrix s(a.dim_);
    for (std::size_t k = 0; k < a.data_.size(); ++k) s.data_[k] = a.data_[k] + b.data_[k];
    return s;
  }

  friend Matrix operator-(const Matrix& a, const Matrix& b) {
    check_dims(a, b);
    Matrix s(a.dim_);
    for (std::size_t k = 0; k < a.data_.size(); ++k) s.data_[k] = a.data_[k] - b.data_[k];
    return s;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    check_dims(a, b);
    const int n = a.dim_;
    Matrix p(n);
    for (int r = 0; r < n; ++r)
      for (int k = 0; k < n; ++k) {
        const double ark = a(r, k);
        if (ark == 0.0) continue;
        for (int c = 0; c < n; ++c) p(r, c) += ark * b(k, c);
      }
    return p;
  }

  friend Matrix operator*(double s, const Matrix& a) {
    Matrix m(a.dim_);
    for (std::size_t k = 0; k < a.data_.size(); ++k) m.data_[k] = s * a.data_[k];
    return m;
  }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t idx(int r, int c) const {
    if (r < 0 || c < 0 || r >= dim_ || c >= dim_) throw std::out_of_range("Matrix index");
    return static_cast<std::size_t>(r) * dim_ + c;
  }
  static void check_dims(const Matrix& a, const Matrix& b) {
    if (a.dim_ != b.dim_) throw std::invalid_argument("Matrix: dimension mismatch");
  }

  int dim_ = 0;
  std::vector<double> data_;
};

/// A Matrix checked to be symmetric at construction.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Matrix m) : m_(std::move(m)) {
    const double bound = 1e-12 * m_.max_abs();
    for (int r = 0; r < m_.dim(); ++r)
      for (int c = r + 1; c < m_.dim(); ++c)
        if (std::abs(m_(r, c) - m_(c, r)) > bound)
          throw std::invalid_argument("SymMatrix: input is not symmetric");
  }

  int dim() const { return m_.dim(); }
  double operator()(int r, int c) const { return m_(r, c); }
  const Matrix& matrix() const { return m_; }
  operator const Matrix&() const { return m_; }

 private:
  Matrix m_;
};

namespace detail {

inline Eigen::MatrixXd to_eigen(const Matrix& m) {
  const int n = m.dim();
  Eigen::MatrixXd e(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) e(r, c) = m(r, c);
  return e;
}

inline std::vector<double> eigenvalues_ascending(const Eigen::MatrixXd& e) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(e, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigensolver did not converge");
  const auto& ev = solver.eigenvalues();
  return std::vector<double>(ev.data(), ev.data() + ev.size());
}

}  // namespace detail

/// All eigenvalues with multiplicity, ascending.
inline std::vector<double> sym_spectrum(const SymMatrix& m) {
  if (m.dim() == 0) throw std::invalid_argument("sym_spectrum: empty matrix");
  return detail::eigenvalues_ascending(detail::to_eigen(m.matrix()));
}

/// Eigenvalues (ascending) and the matrix whose columns are the eigenvectors.
inline std::pair<std::vector<double>, Matrix> sym_eigensystem(const SymMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(detail::to_eigen(m.matrix()));
  if (solver.info() != Eigen::Success)
    throw NumericalError("eigensolver did not converge");
  const int n = m.dim();
  Matrix q(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) q(r, c) = solver.eigenvectors()(r, c);
  const auto& ev = solver.eigenvalues();
  return {std::vector<double>(ev.data(), ev.data() + ev.size()), std::move(q)};
}

/// Singular values, ascending: the spectrum of the positive square root of
/// M^T M. Computed by a Jacobi SVD; the sqrt-of-Gram-eigenvalues route loses
/// half the digits near zero, which the 1e-9 rank cutoff cannot afford.
inline std::vector<double> singular_values(const Matrix& m) {
  if (m.dim() == 0) throw std::invalid_argument("singular_values: empty matrix");
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(detail::to_eigen(m));
  const auto& sv = svd.singularValues();  // descending, nonnegative
  std::vector<double> out(sv.data(), sv.data() + sv.size());
  std::reverse(out.begin(), out.end());
  return out;
}

/// Count of singular values above tol * max(1, largest singular value).
inline int numerical_rank(const Matrix& m, double tol = kRankTol) {
  if (!(tol > 0.0)) throw std::invalid_argument("numerical_rank: tol must be positive");
  const std::vector<double> sv = singular_values(m);
  const double cutoff = tol * std::max(1.0, sv.back());
  int rank = 0;
  for (double s : sv)
    if (s > cutoff) ++rank;
  return rank;
}

/// Normalized eigenvalue-counting function: each eigenvalue carries mass 1/dim.
inline StepFunction spectral_distribution(const SymMatrix& m) {
  const std::vector<double> spectrum = sym_spectrum(m);
  const std::vector<double> masses(spectrum.size(), 1.0 / static_cast<double>(m.dim()));
  return from_samples(spectrum, masses);
}

}  // namespace rankspec
