#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "leafavg/scalar.hpp"

namespace leafavg {

/// Small dense row-major matrix; used for group elements in either scalar mode.
template <class S>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, S(0)) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<S> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows * cols, ErrorKind::DimensionMismatch, "matrix data size mismatch");
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = S(1);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  S& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const S& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<const S> data() const noexcept { return data_; }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    require(a.cols_ == b.rows_, ErrorKind::DimensionMismatch, "matrix product shape mismatch");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        if (ScalarTraits<S>::is_zero(a(i, k))) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += a(i, k) * b(k, j);
      }
    return out;
  }

  Matrix transpose() const {
    Matrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  template <class T>
  std::vector<T> apply(std::span<const T> x) const {
    require(x.size() == cols_, ErrorKind::DimensionMismatch, "matrix-vector shape mismatch");
    std::vector<T> out(rows_, T(0));
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out[i] += scalar_cast<T>((*this)(i, j)) * x[j];
    return out;
  }

  /// Largest entrywise deviation |a - b| as a double.
  double max_abs_diff(const Matrix& other) const {
    double m = 0.0;
    for (std::size_t i = 0; i < data_.size(); ++i) m = std::max(m, std::fabs(to_double(S(data_[i] - other.data_[i]))));
    return m;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
  friend bool operator<(const Matrix& a, const Matrix& b) { return a.data_ < b.data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<S> data_;
};

template <class S>
using Rows = std::vector<std::vector<S>>;

/// Basis of a row span under an inner product given by a Gram matrix.
/// Exact mode: rows are mutually orthogonal (not normalized: norms need square
/// roots). Floating mode: rows are orthonormal and the singular values of the
/// input (in the Gram metric) are reported for rank auditing.
template <class S>
struct SpanBasis {
  Rows<S> rows;
  std::vector<S> squared_norms;         // exact mode only
  std::vector<double> singular_values;  // floating mode only, descending
  std::size_t rank = 0;
  double tolerance = 0.0;
  double reference = 0.0;  // floating only: scale the tolerance is relative to
  /// sigma_rank / sigma_{rank+1}; +inf when there is no discarded direction.
  double gap = std::numeric_limits<double>::infinity();
};

namespace detail {

template <class S>
std::vector<S> gram_apply(const Rows<S>& gram, const std::vector<S>& v) {
  std::vector<S> out(v.size(), S(0));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (ScalarTraits<S>::is_zero(v[i])) continue;
    for (std::size_t j = 0; j < v.size(); ++j)
      if (!ScalarTraits<S>::is_zero(gram[j][i])) out[j] += gram[j][i] * v[i];
  }
  return out;
}

template <class S>
S dot(const std::vector<S>& a, const std::vector<S>& b) {
  S acc(0);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!ScalarTraits<S>::is_zero(a[i]) && !ScalarTraits<S>::is_zero(b[i])) acc += a[i] * b[i];
  return acc;
}

inline Eigen::MatrixXd to_eigen(const Rows<double>& rows, std::size_t cols) {
  Eigen::MatrixXd m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
  return m;
}

}  // namespace detail

/// Exact Gram-Schmidt: appends v's component orthogonal to the current basis.
/// Returns true when v was independent.
template <ExactScalar S>
bool orthogonal_extend(SpanBasis<S>& basis, const Rows<S>& gram, std::vector<S> v) {
  for (std::size_t k = 0; k < basis.rows.size(); ++k) {
    const auto gb = detail::gram_apply(gram, basis.rows[k]);
    const S coeff = detail::dot(v, gb) / basis.squared_norms[k];
    if (ScalarTraits<S>::is_zero(coeff)) continue;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= coeff * basis.rows[k][i];
  }
  const S sq = detail::dot(v, detail::gram_apply(gram, v));
  if (ScalarTraits<S>::is_zero(sq)) return false;
  basis.rows.push_back(std::move(v));
  basis.squared_norms.push_back(sq);
  basis.rank = basis.rows.size();
  return true;
}

template <ExactScalar S>
SpanBasis<S> span_basis(const Rows<S>& vectors, const Rows<S>& gram, double /*tolerance*/ = 0.0) {
  SpanBasis<S> basis;
  for (const auto& v : vectors) orthogonal_extend(basis, gram, v);
  return basis;
}

/// Floating span via SVD in the Gram metric. Rank counts singular values above
/// tolerance * reference; the reference defaults to sigma_max.
inline SpanBasis<double> span_basis(const Rows<double>& vectors, const Rows<double>& gram, double tolerance,
                                    double reference = 0.0) {
  SpanBasis<double> out;
  out.tolerance = tolerance;
  if (vectors.empty()) return out;
  const std::size_t m = gram.size();
  const Eigen::MatrixXd g = detail::to_eigen(gram, m);
  const Eigen::LLT<Eigen::MatrixXd> llt(g);
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::MatrixXd y = detail::to_eigen(vectors, m) * l;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(y, Eigen::ComputeFullV);
  const Eigen::VectorXd sv = svd.singularValues();
  out.singular_values.assign(sv.data(), sv.data() + sv.size());
  const double smax = reference > 0.0 ? reference : (sv.size() ? sv(0) : 0.0);
  out.reference = smax;
  std::size_t r = 0;
  while (r < static_cast<std::size_t>(sv.size()) && smax > 0.0 && sv(r) > tolerance * smax) ++r;
  out.rank = r;
  if (r < static_cast<std::size_t>(sv.size()) && r > 0) out.gap = sv(r - 1) / std::max(sv(r), 1e-300);
  // b_i = L^{-T} v_i
  const Eigen::MatrixXd v = svd.matrixV().leftCols(r);
  const Eigen::MatrixXd b = l.transpose().triangularView<Eigen::Upper>().solve(v);
  for (std::size_t i = 0; i < r; ++i) out.rows.emplace_back(b.col(i).data(), b.col(i).data() + m);
  return out;
}

/// Squared Gram norm of v minus its projection onto span(basis).
template <class S>
S residual_squared(const SpanBasis<S>& basis, const Rows<S>& gram, std::vector<S> v) {
  for (std::size_t k = 0; k < basis.rows.size(); ++k) {
    const auto gb = detail::gram_apply(gram, basis.rows[k]);
    S coeff = detail::dot(v, gb);
    if constexpr (ScalarTraits<S>::exact) coeff /= basis.squared_norms[k];
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= coeff * basis.rows[k][i];
  }
  return detail::dot(v, detail::gram_apply(gram, v));
}

/// Reduced row echelon form, pivot columns taken in index order. In floating
/// mode a column is a pivot only if its largest remaining entry exceeds
/// pivot_tol times the largest entry of the matrix; entries below clean_tol
/// are flushed to zero afterwards.
template <class S>
Rows<S> rref(Rows<S> rows, std::vector<std::size_t>* pivots = nullptr, double pivot_tol = 0.0,
             double clean_tol = 0.0) {
  if (rows.empty()) return rows;
  const std::size_t m = rows.front().size();
  double scale = 0.0;
  if constexpr (!ScalarTraits<S>::exact)
    for (const auto& r : rows)
      for (double v : r) scale = std::max(scale, std::fabs(v));
  std::size_t lead = 0;
  if (pivots) pivots->clear();
  for (std::size_t col = 0; col < m && lead < rows.size(); ++col) {
    std::size_t best = rows.size();
    if constexpr (ScalarTraits<S>::exact) {
      for (std::size_t i = lead; i < rows.size(); ++i)
        if (!ScalarTraits<S>::is_zero(rows[i][col])) { best = i; break; }
    } else {
      double bv = pivot_tol * scale;
      for (std::size_t i = lead; i < rows.size(); ++i)
        if (std::fabs(rows[i][col]) > bv) { bv = std::fabs(rows[i][col]); best = i; }
    }
    if (best == rows.size()) continue;
    std::swap(rows[lead], rows[best]);
    const S inv = S(1) / rows[lead][col];
    for (auto& v : rows[lead]) v *= inv;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == lead || ScalarTraits<S>::is_zero(rows[i][col])) continue;
      const S f = rows[i][col];
      for (std::size_t j = 0; j < m; ++j) rows[i][j] -= f * rows[lead][j];
    }
    if (pivots) pivots->push_back(col);
    ++lead;
  }
  rows.resize(lead);
  if constexpr (!ScalarTraits<S>::exact)
    for (auto& r : rows)
      for (auto& v : r)
        if (std::fabs(v) < clean_tol) v = 0.0;
  return rows;
}

}  // namespace leafavg
