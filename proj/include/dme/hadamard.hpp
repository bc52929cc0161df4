#pragma once

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "dme/error.hpp"
#include "dme/linalg.hpp"
#include "dme/random.hpp"

namespace dme {

constexpr bool is_power_of_two(std::size_t d) noexcept { return d != 0 && std::has_single_bit(d); }

/// Entry (row, col) of the unnormalized Sylvester-ordered Hadamard matrix.
constexpr double hadamard_entry(std::size_t row, std::size_t col) noexcept {
  return (std::popcount(row & col) & 1U) ? -1.0 : 1.0;
}

/// In-place fast Walsh-Hadamard transform, v <- H v, O(d log d).
inline void fwht_inplace(std::span<double> v) {
  const std::size_t d = v.size();
  if (!is_power_of_two(d)) {
    throw DimensionError("fwht: length " + std::to_string(d) + " is not a power of 2");
  }
  for (std::size_t h = 1; h < d; h <<= 1) {
    for (std::size_t i = 0; i < d; i += 2 * h) {
      for (std::size_t j = i; j < i + h; ++j) {
        const double a = v[j];
        const double b = v[j + h];
        v[j] = a + b;
        v[j + h] = a - b;
      }
    }
  }
}

inline DenseVector fwht(std::span<const double> v) {
  DenseVector out(v.begin(), v.end());
  fwht_inplace(out);
  return out;
}

/// k distinct indices from [0, d), in draw order, by partial Fisher-Yates.
inline std::vector<std::uint32_t> sample_without_replacement(CounterRng& rng, std::size_t d,
                                                            std::size_t k) {
  if (k < 1 || k > d) {
    throw ParameterError("sample_without_replacement: need 1 <= k <= d (k=" + std::to_string(k) +
                         ", d=" + std::to_string(d) + ")");
  }
  std::vector<std::uint32_t> pool(d);
  std::iota(pool.begin(), pool.end(), 0U);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.below(d - i);
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  return pool;
}

/// The randomness behind one client's SRHT map G = (1/sqrt d) E H D.
struct Sketch {
  std::size_t dim = 0;
  std::vector<std::uint32_t> rows;  // rows of H kept by E, in payload order
  std::vector<double> signs;        // diagonal of D

  std::size_t size() const noexcept { return rows.size(); }
};

/// Subsample rows of a seed. Shared by Rand-k and SRHT so both schemes pick
/// the same coordinate set from the same seed.
inline std::vector<std::uint32_t> derive_rows(const SketchSeed& seed, std::size_t d, std::size_t k) {
  CounterRng rng(seed, StreamDomain::kSketch);
  return sample_without_replacement(rng, d, k);
}

inline Sketch derive_sketch(const SketchSeed& seed, std::size_t d, std::size_t k) {
  if (!is_power_of_two(d)) {
    throw DimensionError("derive_sketch: d=" + std::to_string(d) + " is not a power of 2");
  }
  Sketch sketch;
  sketch.dim = d;
  CounterRng rng(seed, StreamDomain::kSketch);
  sketch.rows = sample_without_replacement(rng, d, k);
  sketch.signs.resize(d);
  for (auto& s : sketch.signs) s = rng.rademacher();
  return sketch;
}

/// Row r of G as a dense d-vector: g[j] = H[rows[r]][j] * signs[j] / sqrt(d).
inline DenseVector sketch_row(const Sketch& sketch, std::size_t r) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(sketch.dim));
  DenseVector g(sketch.dim);
  const std::size_t h_row = sketch.rows.at(r);
  for (std::size_t j = 0; j < sketch.dim; ++j) g[j] = scale * hadamard_entry(h_row, j) * sketch.signs[j];
  return g;
}

/// G x: sign flip, FWHT, scale, gather.
inline DenseVector srht_apply(const Sketch& sketch, std::span<const double> x) {
  if (x.size() != sketch.dim) {
    throw DimensionError("srht_encode: vector length " + std::to_string(x.size()) +
                         " does not match sketch dimension " + std::to_string(sketch.dim));
  }
  DenseVector work(sketch.dim);
  for (std::size_t j = 0; j < sketch.dim; ++j) work[j] = sketch.signs[j] * x[j];
  fwht_inplace(work);
  const double scale = 1.0 / std::sqrt(static_cast<double>(sketch.dim));
  DenseVector payload(sketch.size());
  for (std::size_t r = 0; r < sketch.size(); ++r) payload[r] = scale * work[sketch.rows[r]];
  return payload;
}

inline DenseVector srht_encode(std::span<const double> x, const SketchSeed& seed, std::size_t k) {
  return srht_apply(derive_sketch(seed, x.size(), k), x);
}

/// out += scale * G^T y, computed as scatter, FWHT, sign flip.
inline void srht_adjoint_accumulate(const Sketch& sketch, std::span<const double> y, double scale,
                                    std::span<double> out) {
  if (y.size() != sketch.size() || out.size() != sketch.dim) {
    throw DimensionError("srht_adjoint: shape mismatch");
  }
  DenseVector work(sketch.dim, 0.0);
  for (std::size_t r = 0; r < sketch.size(); ++r) work[sketch.rows[r]] += y[r];
  fwht_inplace(work);
  const double s = scale / std::sqrt(static_cast<double>(sketch.dim));
  for (std::size_t j = 0; j < sketch.dim; ++j) out[j] += s * sketch.signs[j] * work[j];
}

/// S = sum_i G_i^T G_i as a sum of outer products of reconstructed sketch rows.
inline SymmetricMatrix accumulate_gram(std::span<const Sketch> sketches) {
  if (sketches.empty()) throw ParameterError("accumulate_gram: no sketches");
  const std::size_t d = sketches.front().dim;
  SymmetricMatrix gram(d);
  for (const auto& sketch : sketches) {
    if (sketch.dim != d) throw DimensionError("accumulate_gram: mixed dimensions");
    for (std::size_t r = 0; r < sketch.size(); ++r) gram.add_outer(sketch_row(sketch, r));
  }
  return gram;
}

inline SymmetricMatrix accumulate_gram(std::span<const SketchSeed> seeds, std::size_t d, std::size_t k) {
  std::vector<Sketch> sketches;
  sketches.reserve(seeds.size());
  for (const auto& seed : seeds) sketches.push_back(derive_sketch(seed, d, k));
  return accumulate_gram(sketches);
}

/// Gram matrix K = A A^T of the stacked sketch rows A (all nk rows). Shares
/// its nonzero spectrum with S = A^T A. Same-client blocks are identity; the
/// cross block of clients i, l is H(s_i * s_l) / d read at row_a XOR row_b.
inline Matrix stacked_row_gram(std::span<const Sketch> sketches) {
  std::size_t m = 0;
  for (const auto& s : sketches) m += s.size();
  Matrix gram(m, m);
  if (sketches.empty()) return gram;
  const std::size_t d = sketches.front().dim;
  const double inv_d = 1.0 / static_cast<double>(d);
  std::vector<std::size_t> offset(sketches.size() + 1, 0);
  for (std::size_t i = 0; i < sketches.size(); ++i) offset[i + 1] = offset[i] + sketches[i].size();
  DenseVector product(d);
  for (std::size_t i = 0; i < sketches.size(); ++i) {
    if (sketches[i].dim != d) throw DimensionError("stacked_row_gram: mixed dimensions");
    for (std::size_t a = 0; a < sketches[i].size(); ++a) gram(offset[i] + a, offset[i] + a) = 1.0;
    for (std::size_t l = i + 1; l < sketches.size(); ++l) {
      for (std::size_t j = 0; j < d; ++j) product[j] = sketches[i].signs[j] * sketches[l].signs[j];
      fwht_inplace(product);
      for (std::size_t a = 0; a < sketches[i].size(); ++a) {
        for (std::size_t b = 0; b < sketches[l].size(); ++b) {
          const double v = inv_d * product[sketches[i].rows[a] ^ sketches[l].rows[b]];
          gram(offset[i] + a, offset[l] + b) = v;
          gram(offset[l] + b, offset[i] + a) = v;
        }
      }
    }
  }
  return gram;
}

}  // namespace dme
