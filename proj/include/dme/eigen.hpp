#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "dme/error.hpp"
#include "dme/linalg.hpp"
#include "dme/transforms.hpp"

namespace dme {

/// Eigenvalues in descending order; column j of `eigenvectors` pairs with
/// eigenvalues[j].
struct EigenDecomposition {
  DenseVector eigenvalues;
  Matrix eigenvectors;

  std::size_t dim() const noexcept { return eigenvalues.size(); }

  Matrix reconstruct() const {
    const std::size_t d = dim();
    Matrix out(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        double sum = 0.0;
        for (std::size_t c = 0; c < d; ++c) sum += eigenvectors(i, c) * eigenvalues[c] * eigenvectors(j, c);
        out(i, j) = sum;
      }
    return out;
  }
};

struct JacobiOptions {
  double relative_tolerance = 1e-12;  // stop when off(A) <= tol * ||A||_F
  int max_sweeps = 100;
};

/// Numerical rank threshold relative to the largest eigenvalue: d * epsilon.
inline double default_rank_tol(std::size_t d) {
  return static_cast<double>(d) * std::numeric_limits<double>::epsilon();
}

namespace detail {

inline double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j)
      if (i != j) sum += a(i, j) * a(i, j);
  return std::sqrt(sum);
}

}  // namespace detail

/// Cyclic Jacobi eigendecomposition of a dense symmetric matrix. Only the
/// values are trusted to be symmetric; the caller owns that guarantee.
inline EigenDecomposition eigh(Matrix a, const JacobiOptions& options = {}) {
  const std::size_t d = a.rows();
  if (a.cols() != d) throw DimensionError("eigh: matrix is not square");
  if (!all_finite(a.data())) throw ParameterError("eigh: non-finite entry");
  Matrix v = Matrix::identity(d);
  const double norm = a.frobenius_norm();

  int sweep = 0;
  double off = detail::off_diagonal_norm(a);
  while (off > options.relative_tolerance * norm) {
    if (sweep == options.max_sweeps) {
      throw NumericalError("eigh: Jacobi did not converge after " + std::to_string(sweep) +
                           " sweeps (off-diagonal norm " + std::to_string(off) + ", matrix norm " +
                           std::to_string(norm) + ", dimension " + std::to_string(d) + ")");
    }
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (std::size_t r = 0; r < d; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          const double new_rp = c * arp - s * arq;
          const double new_rq = s * arp + c * arq;
          a(r, p) = a(p, r) = new_rp;
          a(r, q) = a(q, r) = new_rq;
        }
        for (std::size_t r = 0; r < d; ++r) {
          const double vrp = v(r, p);
          const double vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
    }
    ++sweep;
    off = detail::off_diagonal_norm(a);
  }

  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
  EigenDecomposition out;
  out.eigenvalues.resize(d);
  out.eigenvectors = Matrix(d, d);
  for (std::size_t c = 0; c < d; ++c) {
    out.eigenvalues[c] = a(order[c], order[c]);
    for (std::size_t r = 0; r < d; ++r) out.eigenvectors(r, c) = v(r, order[c]);
  }
  return out;
}

inline EigenDecomposition eigh(const SymmetricMatrix& s, const JacobiOptions& options = {}) {
  return eigh(s.to_dense(), options);
}

/// Number of eigenvalues above rank_tol * largest eigenvalue.
inline std::size_t numerical_rank(std::span<const double> descending_eigenvalues, double rank_tol) {
  if (descending_eigenvalues.empty() || descending_eigenvalues.front() <= 0.0) return 0;
  const double cutoff = rank_tol * descending_eigenvalues.front();
  std::size_t rank = 0;
  for (double lambda : descending_eigenvalues)
    if (lambda > cutoff) ++rank;
  return rank;
}

/// Weights 1/T(lambda) on retained eigenvalues, 0 on the rest. Eigenvalues at
/// or below rank_tol * lambda_max count as zero before T is applied.
inline DenseVector transformed_inverse_weights(std::span<const double> descending_eigenvalues,
                                               const TransformSpec& transform, double rank_tol) {
  if (rank_tol < 0.0) throw ParameterError("rank_tol must be nonnegative");
  DenseVector weights(descending_eigenvalues.size(), 0.0);
  if (descending_eigenvalues.empty() || descending_eigenvalues.front() <= 0.0) return weights;
  const double cutoff = rank_tol * descending_eigenvalues.front();
  for (std::size_t j = 0; j < descending_eigenvalues.size(); ++j) {
    const double lambda = descending_eigenvalues[j];
    if (!(lambda > cutoff)) continue;
    const double t = transform(lambda);
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw DegenerateTransformError("transform " + transform.label() + " maps retained eigenvalue " +
                                     std::to_string(lambda) + " to " + std::to_string(t));
    }
    weights[j] = 1.0 / t;
  }
  return weights;
}

/// (T(S))^dagger = U diag(1/T(lambda)) U^T over the retained spectrum.
inline SymmetricMatrix transformed_pinv(const EigenDecomposition& eig, const TransformSpec& transform,
                                        double rank_tol) {
  const DenseVector weights = transformed_inverse_weights(eig.eigenvalues, transform, rank_tol);
  const std::size_t d = eig.dim();
  SymmetricMatrix out(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j) {
      double sum = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        if (weights[c] != 0.0) sum += eig.eigenvectors(i, c) * weights[c] * eig.eigenvectors(j, c);
      }
      out.set(i, j, sum);
    }
  return out;
}

}  // namespace dme
