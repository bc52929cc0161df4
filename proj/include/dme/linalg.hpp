#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dme/error.hpp"

namespace dme {

using DenseVector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("squared_distance: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    sum += diff * diff;
  }
  return sum;
}

inline bool all_finite(std::span<const double> a) {
  for (double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

inline void require_finite(std::span<const double> a, const char* what) {
  if (!all_finite(a)) throw ParameterError(std::string(what) + ": non-finite entry");
}

/// Element-wise mean of equally sized vectors.
inline DenseVector mean_of(std::span<const DenseVector> vectors) {
  if (vectors.empty()) throw DimensionError("mean_of: no vectors");
  DenseVector mean(vectors.front().size(), 0.0);
  for (const auto& v : vectors) {
    if (v.size() != mean.size()) throw DimensionError("mean_of: length mismatch");
    for (std::size_t j = 0; j < v.size(); ++j) mean[j] += v[j];
  }
  const double inv = 1.0 / static_cast<double>(vectors.size());
  for (double& m : mean) m *= inv;
  return mean;
}

/// Row-major dense matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const noexcept {
    return {data_.data() + i * cols_, cols_};
  }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double frobenius_norm() const {
    double sum = 0.0;
    for (double v : data_) sum += v * v;
    return std::sqrt(sum);
  }

  DenseVector multiply(std::span<const double> x) const {
    if (x.size() != cols_) throw DimensionError("Matrix::multiply: length mismatch");
    DenseVector y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) y[i] = dot(row(i), x);
    return y;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw DimensionError("Matrix product: shape mismatch");
    Matrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t l = 0; l < a.cols_; ++l) {
        const double ail = a(i, l);
        if (ail == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += ail * b(l, j);
      }
    return c;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Symmetric matrix with packed upper-triangular storage.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(std::size_t dim) : dim_(dim), packed_(dim * (dim + 1) / 2, 0.0) {}

  /// Symmetrizes by averaging the two triangles of `dense`.
  static SymmetricMatrix from_dense(const Matrix& dense) {
    if (dense.rows() != dense.cols()) throw DimensionError("SymmetricMatrix: not square");
    SymmetricMatrix s(dense.rows());
    for (std::size_t i = 0; i < s.dim_; ++i)
      for (std::size_t j = i; j < s.dim_; ++j) s.packed_[s.index(i, j)] = 0.5 * (dense(i, j) + dense(j, i));
    return s;
  }

  static SymmetricMatrix diagonal(std::span<const double> values) {
    SymmetricMatrix s(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) s.packed_[s.index(i, i)] = values[i];
    return s;
  }

  std::size_t dim() const noexcept { return dim_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return packed_[index(i, j)]; }
  void set(std::size_t i, std::size_t j, double value) noexcept { packed_[index(i, j)] = value; }
  void add(std::size_t i, std::size_t j, double value) noexcept { packed_[index(i, j)] += value; }

  /// this += scale * g g^T
  void add_outer(std::span<const double> g, double scale = 1.0) {
    if (g.size() != dim_) throw DimensionError("add_outer: length mismatch");
    std::size_t p = 0;
    for (std::size_t i = 0; i < dim_; ++i) {
      const double gi = scale * g[i];
      for (std::size_t j = i; j < dim_; ++j) packed_[p++] += gi * g[j];
    }
  }

  double trace() const noexcept {
    double t = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) t += (*this)(i, i);
    return t;
  }

  Matrix to_dense() const {
    Matrix m(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = i; j < dim_; ++j) m(i, j) = m(j, i) = (*this)(i, j);
    return m;
  }

  DenseVector multiply(std::span<const double> x) const {
    if (x.size() != dim_) throw DimensionError("SymmetricMatrix::multiply: length mismatch");
    DenseVector y(dim_, 0.0);
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = 0; j < dim_; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
  }

  double frobenius_norm() const { return to_dense().frobenius_norm(); }

 private:
  std::size_t index(std::size_t i, std::size_t j) const noexcept {
    if (i > j) std::swap(i, j);
    return i * dim_ - i * (i - 1) / 2 + (j - i);
  }

  std::size_t dim_ = 0;
  std::vector<double> packed_;
};

}  // namespace dme
