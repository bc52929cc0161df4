#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dme/eigen.hpp"
#include "dme/error.hpp"
#include "dme/hadamard.hpp"
#include "dme/linalg.hpp"
#include "dme/random.hpp"
#include "dme/transforms.hpp"

namespace dme {

/// What a client puts on the wire.
enum class Encoding { RandK, Srht, Wangni, Induced, NaiveRotation };

/// Encoder/decoder pairs. RandProjSubsampled runs the generic eigen-transform
/// decoder on plain subsampling maps and exists to check it against the
/// coordinate-wise RandKSpatial decoder.
enum class Method { RandK, RandKSpatial, RandProjSpatial, RandProjSubsampled, Wangni, Induced, NaiveRotation };

inline Encoding encoding_of(Method m) {
  switch (m) {
    case Method::RandK:
    case Method::RandKSpatial:
    case Method::RandProjSubsampled: return Encoding::RandK;
    case Method::RandProjSpatial: return Encoding::Srht;
    case Method::Wangni: return Encoding::Wangni;
    case Method::Induced: return Encoding::Induced;
    case Method::NaiveRotation: return Encoding::NaiveRotation;
  }
  return Encoding::RandK;
}

inline std::string_view to_string(Encoding e) {
  switch (e) {
    case Encoding::RandK: return "rand_k";
    case Encoding::Srht: return "srht";
    case Encoding::Wangni: return "wangni";
    case Encoding::Induced: return "induced";
    case Encoding::NaiveRotation: return "naive_rotation";
  }
  return "?";
}

/// Client seed used for the rotation every client shares in NaiveRotation.
inline constexpr std::uint64_t kSharedClient = ~std::uint64_t{0};

struct EncodedMessage {
  Encoding scheme_tag = Encoding::RandK;
  SketchSeed seed;
  std::size_t dim = 0;
  std::size_t budget = 0;
  DenseVector payload;
  // Wangni: sampled coordinates. Induced: Top-k coordinates.
  std::vector<std::uint32_t> indices;
  // Wangni: inverse inclusion probabilities for `indices`.
  std::vector<double> weights;
  // Induced: payload[0, top_count) are Top-k values, the rest the residual sample.
  std::size_t top_count = 0;
  std::optional<SketchSeed> rotation_seed;
  bool zero = false;
};

struct DecoderConfig {
  std::size_t n = 1;
  std::size_t d = 1;
  std::size_t k = 1;
  TransformSpec transform = TransformSpec::identity();
  double beta_bar = 1.0;
  double rank_tol = -1.0;  // negative: default_rank_tol(d)

  double effective_rank_tol() const { return rank_tol < 0.0 ? default_rank_tol(d) : rank_tol; }
  /// More sketch rows than dimensions; the decoders still work.
  bool oversampled() const { return n * k > d; }

  void validate() const {
    if (!(beta_bar > 0.0) || !std::isfinite(beta_bar)) throw ParameterError("beta_bar must be finite and positive");
    if (k < 1 || k > d) throw ParameterError("decoder: need 1 <= k <= d");
    if (n < 1) throw ParameterError("decoder: need n >= 1");
  }
};

namespace detail {

inline void check_messages(std::span<const EncodedMessage> messages, const DecoderConfig& config,
                           Encoding expected, const char* who) {
  config.validate();
  if (messages.size() != config.n) {
    throw ProtocolError(std::string(who) + ": expected " + std::to_string(config.n) + " messages, got " +
                        std::to_string(messages.size()));
  }
  for (const auto& m : messages) {
    if (m.scheme_tag != expected) {
      throw ProtocolError(std::string(who) + ": message tagged " + std::string(to_string(m.scheme_tag)) +
                          ", expected " + std::string(to_string(expected)));
    }
    if (m.dim != config.d) throw ProtocolError(std::string(who) + ": message dimension mismatch");
  }
}

inline void check_input(std::span<const double> x, std::size_t k) {
  if (x.empty()) throw DimensionError("encode: empty vector");
  if (k < 1 || k > x.size()) {
    throw ParameterError("encode: need 1 <= k <= d (k=" + std::to_string(k) + ", d=" + std::to_string(x.size()) +
                         ")");
  }
  require_finite(x, "encode");
}

inline std::vector<Sketch> sketches_of(std::span<const EncodedMessage> messages) {
  std::vector<Sketch> sketches;
  sketches.reserve(messages.size());
  for (const auto& m : messages) {
    Sketch s = derive_sketch(m.seed, m.dim, m.budget);
    if (s.size() != m.payload.size()) throw ProtocolError("srht message payload length does not match budget");
    sketches.push_back(std::move(s));
  }
  return sketches;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// Rand-k and the Rand-k-Spatial family

inline EncodedMessage randk_encode(std::span<const double> x, const SketchSeed& seed, std::size_t k) {
  detail::check_input(x, k);
  EncodedMessage msg;
  msg.scheme_tag = Encoding::RandK;
  msg.seed = seed;
  msg.dim = x.size();
  msg.budget = k;
  const auto rows = derive_rows(seed, x.size(), k);
  msg.payload.resize(k);
  for (std::size_t r = 0; r < k; ++r) msg.payload[r] = x[rows[r]];
  return msg;
}

/// (1/n)(d/k) sum_i E_i^T payload_i.
inline DenseVector randk_decode(std::span<const EncodedMessage> messages, const DecoderConfig& config) {
  detail::check_messages(messages, config, Encoding::RandK, "randk_decode");
  DenseVector est(config.d, 0.0);
  for (const auto& m : messages) {
    const auto rows = derive_rows(m.seed, m.dim, m.budget);
    for (std::size_t r = 0; r < rows.size(); ++r) est[rows[r]] += m.payload.at(r);
  }
  const double scale = (static_cast<double>(config.d) / static_cast<double>(config.k)) / static_cast<double>(config.n);
  for (double& v : est) v *= scale;
  return est;
}

/// M_j: how many clients sent coordinate j.
inline std::vector<std::size_t> coordinate_hit_counts(std::span<const EncodedMessage> messages, std::size_t d) {
  std::vector<std::size_t> counts(d, 0);
  for (const auto& m : messages)
    for (auto r : derive_rows(m.seed, m.dim, m.budget)) ++counts[r];
  return counts;
}

/// Coordinate j = (beta/n) * sum_i payload_i(j) / T(M_j); unreceived coordinates are 0.
inline DenseVector randk_spatial_decode(std::span<const EncodedMessage> messages, const DecoderConfig& config) {
  detail::check_messages(messages, config, Encoding::RandK, "randk_spatial_decode");
  DenseVector sums(config.d, 0.0);
  std::vector<std::size_t> counts(config.d, 0);
  for (const auto& m : messages) {
    const auto rows = derive_rows(m.seed, m.dim, m.budget);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      sums[rows[r]] += m.payload.at(r);
      ++counts[rows[r]];
    }
  }
  const double scale = config.beta_bar / static_cast<double>(config.n);
  DenseVector est(config.d, 0.0);
  for (std::size_t j = 0; j < config.d; ++j) {
    if (counts[j] == 0) continue;
    const double t = config.transform(static_cast<double>(counts[j]));
    if (!(t > 0.0)) {
      throw DegenerateTransformError("transform " + config.transform.label() + " maps count " +
                                     std::to_string(counts[j]) + " to " + std::to_string(t));
    }
    est[j] = scale * sums[j] / t;
  }
  return est;
}

// ----------------------------------------------------------------------------
// Rand-Proj-Spatial

inline EncodedMessage rps_encode(std::span<const double> x, const SketchSeed& seed, std::size_t k) {
  detail::check_input(x, k);
  EncodedMessage msg;
  msg.scheme_tag = Encoding::Srht;
  msg.seed = seed;
  msg.dim = x.size();
  msg.budget = k;
  msg.payload = srht_encode(x, seed, k);
  return msg;
}

/// Spectral factorization of S = sum_i G_i^T G_i carried out on the small
/// Gram matrix K = A A^T of the stacked sketch rows A. With K = V L V^T,
///   (T(S))^dagger sum_i G_i^T p_i = A^T V diag(1/T(L)) V^T p,
/// so the d x d matrix S is never formed. The eigendecomposition does not
/// depend on T and can be reused across transforms.
class SrhtGramFactor {
 public:
  explicit SrhtGramFactor(std::vector<Sketch> sketches, double rank_tol = -1.0)
      : sketches_(std::move(sketches)) {
    if (sketches_.empty()) throw ParameterError("SrhtGramFactor: no sketches");
    dim_ = sketches_.front().dim;
    rank_tol_ = rank_tol < 0.0 ? default_rank_tol(dim_) : rank_tol;
    spectrum_ = eigh(stacked_row_gram(sketches_));
  }

  std::size_t dim() const noexcept { return dim_; }
  const std::vector<Sketch>& sketches() const noexcept { return sketches_; }
  /// Nonzero spectrum of S, padded with numerical zeros up to nk entries.
  const DenseVector& eigenvalues() const noexcept { return spectrum_.eigenvalues; }
  std::size_t rank() const { return numerical_rank(spectrum_.eigenvalues, rank_tol_); }

  /// scale * (T(S))^dagger * sum_i G_i^T payloads[i].
  DenseVector apply(std::span<const DenseVector> payloads, const TransformSpec& transform, double scale) const {
    if (payloads.size() != sketches_.size()) throw ProtocolError("SrhtGramFactor: payload count mismatch");
    const std::size_t m = spectrum_.dim();
    DenseVector stacked;
    stacked.reserve(m);
    for (std::size_t i = 0; i < payloads.size(); ++i) {
      if (payloads[i].size() != sketches_[i].size()) throw ProtocolError("SrhtGramFactor: payload length mismatch");
      stacked.insert(stacked.end(), payloads[i].begin(), payloads[i].end());
    }
    const DenseVector weights = transformed_inverse_weights(spectrum_.eigenvalues, transform, rank_tol_);
    const Matrix& v = spectrum_.eigenvectors;
    DenseVector coeff(m, 0.0);
    for (std::size_t c = 0; c < m; ++c) {
      if (weights[c] == 0.0) continue;
      double proj = 0.0;
      for (std::size_t r = 0; r < m; ++r) proj += v(r, c) * stacked[r];
      proj *= weights[c];
      for (std::size_t r = 0; r < m; ++r) coeff[r] += v(r, c) * proj;
    }
    DenseVector est(dim_, 0.0);
    std::size_t offset = 0;
    for (const auto& sketch : sketches_) {
      srht_adjoint_accumulate(sketch, std::span<const double>(coeff).subspan(offset, sketch.size()), scale, est);
      offset += sketch.size();
    }
    return est;
  }

 private:
  std::vector<Sketch> sketches_;
  std::size_t dim_ = 0;
  double rank_tol_ = 0.0;
  EigenDecomposition spectrum_;
};

/// Decodes through an existing factorization of the same seeds.
inline DenseVector rps_decode(std::span<const EncodedMessage> messages, const DecoderConfig& config,
                              const SrhtGramFactor& factor) {
  detail::check_messages(messages, config, Encoding::Srht, "rps_decode");
  std::vector<DenseVector> payloads;
  payloads.reserve(messages.size());
  for (const auto& m : messages) payloads.push_back(m.payload);
  return factor.apply(payloads, config.transform, config.beta_bar / static_cast<double>(config.n));
}

/// Same estimate through the dense route: S = accumulate_gram, eigh(S),
/// transformed_pinv, then multiply. O(d^3); used for nk > d and as a cross-check.
inline DenseVector rps_decode_dense(std::span<const EncodedMessage> messages, const DecoderConfig& config) {
  detail::check_messages(messages, config, Encoding::Srht, "rps_decode");
  const auto sketches = detail::sketches_of(messages);
  const SymmetricMatrix gram = accumulate_gram(sketches);
  const SymmetricMatrix pinv = transformed_pinv(eigh(gram), config.transform, config.effective_rank_tol());
  DenseVector v(config.d, 0.0);
  for (std::size_t i = 0; i < messages.size(); ++i) srht_adjoint_accumulate(sketches[i], messages[i].payload, 1.0, v);
  DenseVector est = pinv.multiply(v);
  const double scale = config.beta_bar / static_cast<double>(config.n);
  for (double& e : est) e *= scale;
  return est;
}

/// x_hat = (beta/n) (T(S))^dagger sum_i G_i^T payload_i.
inline DenseVector rps_decode(std::span<const EncodedMessage> messages, const DecoderConfig& config) {
  if (config.oversampled()) return rps_decode_dense(messages, config);
  detail::check_messages(messages, config, Encoding::Srht, "rps_decode");
  const SrhtGramFactor factor(detail::sketches_of(messages), config.effective_rank_tol());
  return rps_decode(messages, config, factor);
}

/// The eigen-transform decoder with G_i = E_i (plain subsampling). S is then
/// diagonal with the hit counts M_j on its diagonal.
inline DenseVector rps_decode_with_subsampling(std::span<const EncodedMessage> messages,
                                               const DecoderConfig& config) {
  detail::check_messages(messages, config, Encoding::RandK, "rps_decode_with_subsampling");
  SymmetricMatrix gram(config.d);
  DenseVector v(config.d, 0.0);
  for (const auto& m : messages) {
    const auto rows = derive_rows(m.seed, m.dim, m.budget);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      gram.add(rows[r], rows[r], 1.0);
      v[rows[r]] += m.payload.at(r);
    }
  }
  const SymmetricMatrix pinv = transformed_pinv(eigh(gram), config.transform, config.effective_rank_tol());
  DenseVector est = pinv.multiply(v);
  const double scale = config.beta_bar / static_cast<double>(config.n);
  for (double& e : est) e *= scale;
  return est;
}

// ----------------------------------------------------------------------------
// Wangni adaptive sparsification

/// Inclusion probabilities p_j proportional to |x_j|, capped at 1, rescaled
/// until they sum to k (or every nonzero coordinate is saturated).
inline DenseVector wangni_probabilities(std::span<const double> x, std::size_t k) {
  const std::size_t d = x.size();
  DenseVector p(d, 0.0);
  double total = 0.0;
  for (double v : x) total += std::abs(v);
  if (total == 0.0) return p;
  for (std::size_t j = 0; j < d; ++j) p[j] = std::min(1.0, static_cast<double>(k) * std::abs(x[j]) / total);
  const double target = static_cast<double>(k);
  for (int iter = 0; iter < 100; ++iter) {
    double sum = 0.0;
    double free_mass = 0.0;
    std::size_t saturated = 0;
    for (double pj : p) {
      sum += pj;
      if (pj >= 1.0) {
        ++saturated;
      } else {
        free_mass += pj;
      }
    }
    if (std::abs(sum - target) <= 1e-9 || free_mass == 0.0) break;
    const double scale = (target - static_cast<double>(saturated)) / free_mass;
    for (double& pj : p)
      if (pj < 1.0) pj = std::min(1.0, pj * scale);
  }
  return p;
}

/// Samples coordinate j with probability p_j (systematic sampling: at most k
/// coordinates, exact inclusion probabilities) and sends x_j / p_j.
inline EncodedMessage wangni_encode(std::span<const double> x, const SketchSeed& seed, std::size_t k) {
  detail::check_input(x, k);
  EncodedMessage msg;
  msg.scheme_tag = Encoding::Wangni;
  msg.seed = seed;
  msg.dim = x.size();
  msg.budget = k;
  const DenseVector p = wangni_probabilities(x, k);
  double total = 0.0;
  for (double pj : p) total += pj;
  if (total == 0.0) {
    msg.zero = true;
    return msg;
  }
  CounterRng rng(seed, StreamDomain::kSampling);
  double point = rng.uniform();
  double cumulative = 0.0;
  for (std::size_t j = 0; j < x.size() && msg.indices.size() < k; ++j) {
    if (p[j] <= 0.0) continue;
    cumulative += p[j];
    if (point < cumulative) {
      msg.indices.push_back(static_cast<std::uint32_t>(j));
      msg.weights.push_back(1.0 / p[j]);
      msg.payload.push_back(x[j] / p[j]);
      point += 1.0;
    }
  }
  return msg;
}

inline DenseVector wangni_decode(std::span<const EncodedMessage> messages, const DecoderConfig& config) {
  detail::check_messages(messages, config, Encoding::Wangni, "wangni_decode");
  DenseVector est(config.d, 0.0);
  for (const auto& m : messages) {
    if (m.payload.size() != m.indices.size()) throw ProtocolError("wangni message: indices/payload mismatch");
    for (std::size_t r = 0; r < m.indices.size(); ++r) est.at(m.indices[r]) += m.payload[r];
  }
  for (double& v : est) v /= static_cast<double>(config.n);
  return est;
}

// ----------------------------------------------------------------------------
// Induced compressor: Top-k plus unbiased Rand-k of the residual

/// Indices of the `count` largest magnitudes; ties go to the lower index.
inline std::vector<std::uint32_t> top_k_indices(std::span<const double> x, std::size_t count) {
  std::vector<std::uint32_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0U);
  auto before = [&](std::uint32_t a, std::uint32_t b) {
    const double ma = std::abs(x[a]);
    const double mb = std::abs(x[b]);
    return ma != mb ? ma > mb : a < b;
  };
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(), before);
  idx.resize(count);
  return idx;
}

inline EncodedMessage induced_encode(std::span<const double> x, const SketchSeed& seed, std::size_t k_top,
                                     std::size_t k_rand) {
  if (k_top < 1 || k_rand < 1) throw ParameterError("induced_encode: k_top and k_rand must be >= 1");
  if (k_top + k_rand > x.size()) throw ParameterError("induced_encode: k_top + k_rand exceeds d");
  detail::check_input(x, k_top + k_rand);
  EncodedMessage msg;
  msg.scheme_tag = Encoding::Induced;
  msg.seed = seed;
  msg.dim = x.size();
  msg.budget = k_rand;
  msg.top_count = k_top;
  msg.indices = top_k_indices(x, k_top);
  DenseVector residual(x.begin(), x.end());
  for (auto j : msg.indices) {
    msg.payload.push_back(x[j]);
    residual[j] = 0.0;
  }
  for (auto r : derive_rows(seed, x.size(), k_rand)) msg.payload.push_back(residual[r]);
  return msg;
}

/// Budget split used when only a total budget is given: half Top-k, rest Rand-k.
inline std::pair<std::size_t, std::size_t> induced_split(std::size_t k) {
  if (k < 2) throw ParameterError("induced: total budget k must be >= 2");
  return {k / 2, k - k / 2};
}

/// Client value delta + (d/k_rand) E^T r, averaged over clients.
inline DenseVector induced_decode(std::span<const EncodedMessage> messages, const DecoderConfig& config) {
  config.validate();
  if (messages.size() != config.n) throw ProtocolError("induced_decode: message count mismatch");
  DenseVector est(config.d, 0.0);
  for (const auto& m : messages) {
    if (m.scheme_tag != Encoding::Induced || m.dim != config.d) throw ProtocolError("induced_decode: bad message");
    if (m.indices.size() != m.top_count || m.payload.size() != m.top_count + m.budget) {
      throw ProtocolError("induced_decode: malformed message");
    }
    for (std::size_t r = 0; r < m.top_count; ++r) est.at(m.indices[r]) += m.payload[r];
    const auto rows = derive_rows(m.seed, m.dim, m.budget);
    const double scale = static_cast<double>(m.dim) / static_cast<double>(m.budget);
    for (std::size_t r = 0; r < rows.size(); ++r) est[rows[r]] += scale * m.payload[m.top_count + r];
  }
  for (double& v : est) v /= static_cast<double>(config.n);
  return est;
}

// ----------------------------------------------------------------------------
// Rand-k after a rotation shared by every client

inline Sketch shared_rotation(const SketchSeed& rotation_seed, std::size_t d) {
  return derive_sketch(rotation_seed, d, d);
}

/// y = R x with R = (1/sqrt d) H D (full, orthogonal), then Rand-k on y.
/// Without a rotation seed R is the identity.
inline EncodedMessage naive_rotation_encode(std::span<const double> x, const std::optional<SketchSeed>& rotation_seed,
                                            const SketchSeed& sample_seed, std::size_t k) {
  detail::check_input(x, k);
  DenseVector rotated(x.begin(), x.end());
  if (rotation_seed) {
    const Sketch rot = shared_rotation(*rotation_seed, x.size());
    for (std::size_t j = 0; j < x.size(); ++j) rotated[j] = rot.signs[j] * x[j];
    fwht_inplace(rotated);
    const double s = 1.0 / std::sqrt(static_cast<double>(x.size()));
    for (double& v : rotated) v *= s;
  }
  EncodedMessage msg = randk_encode(rotated, sample_seed, k);
  msg.scheme_tag = Encoding::NaiveRotation;
  msg.rotation_seed = rotation_seed;
  return msg;
}

/// R^T (d/k)(1/n) sum_i E_i^T payload_i.
inline DenseVector naive_rotation_decode(std::span<const EncodedMessage> messages, const DecoderConfig& config) {
  detail::check_messages(messages, config, Encoding::NaiveRotation, "naive_rotation_decode");
  const auto& rotation_seed = messages.front().rotation_seed;
  DenseVector z(config.d, 0.0);
  for (const auto& m : messages) {
    if (m.rotation_seed != rotation_seed) throw ProtocolError("naive_rotation_decode: clients used different rotations");
    const auto rows = derive_rows(m.seed, m.dim, m.budget);
    for (std::size_t r = 0; r < rows.size(); ++r) z[rows[r]] += m.payload.at(r);
  }
  const double scale = (static_cast<double>(config.d) / static_cast<double>(config.k)) / static_cast<double>(config.n);
  for (double& v : z) v *= scale;
  if (!rotation_seed) return z;
  const Sketch rot = shared_rotation(*rotation_seed, config.d);
  fwht_inplace(z);
  const double s = 1.0 / std::sqrt(static_cast<double>(config.d));
  for (std::size_t j = 0; j < config.d; ++j) z[j] *= s * rot.signs[j];
  return z;
}

// ----------------------------------------------------------------------------
// Named estimators

struct EstimatorSpec {
  Method method = Method::RandK;
  TransformSpec transform = TransformSpec::constant_one();

  bool needs_beta() const {
    return method == Method::RandKSpatial || method == Method::RandProjSpatial || method == Method::RandProjSubsampled;
  }
  Encoding encoding() const { return encoding_of(method); }

  /// Canonical scheme name, e.g. "rps_opt" or "rand_k_spatial_max".
  std::string name() const {
    const std::string kind(to_string(transform.kind));
    switch (method) {
      case Method::RandK: return "rand_k";
      case Method::RandKSpatial: return "rand_k_spatial_" + kind;
      case Method::RandProjSpatial: return "rps_" + kind;
      case Method::RandProjSubsampled: return "rps_subsampled_" + kind;
      case Method::Wangni: return "wangni";
      case Method::Induced: return "induced";
      case Method::NaiveRotation: return "naive_rotation";
    }
    return "?";
  }
};

/// Parses a scheme name. Spatial schemes take their transform from the
/// suffix (max, avg, opt, one); `n` and `R` complete the transform.
inline EstimatorSpec make_estimator(std::string_view name, std::size_t n, double R = 0.0) {
  auto with_kind = [&](Method method, std::string_view suffix) {
    return EstimatorSpec{method, TransformSpec::make(parse_transform_kind(suffix), n, R)};
  };
  auto strip = [&](std::string_view prefix) -> std::optional<std::string_view> {
    if (name.substr(0, prefix.size()) == prefix) return name.substr(prefix.size());
    return std::nullopt;
  };
  if (name == "rand_k") return {Method::RandK, TransformSpec::constant_one()};
  if (name == "wangni") return {Method::Wangni, TransformSpec::constant_one()};
  if (name == "induced") return {Method::Induced, TransformSpec::constant_one()};
  if (name == "naive_rotation") return {Method::NaiveRotation, TransformSpec::constant_one()};
  if (auto s = strip("rand_k_spatial_")) return with_kind(Method::RandKSpatial, *s);
  if (auto s = strip("rps_subsampled_")) return with_kind(Method::RandProjSubsampled, *s);
  if (auto s = strip("rps_")) return with_kind(Method::RandProjSpatial, *s);
  throw ParameterError("unknown scheme '" + std::string(name) + "'");
}

inline SketchSeed rotation_seed_for(const SketchSeed& seed) {
  return {seed.master_seed, kSharedClient, seed.round_index};
}

inline EncodedMessage encode(const EstimatorSpec& spec, std::span<const double> x, const SketchSeed& seed,
                             std::size_t k) {
  switch (spec.encoding()) {
    case Encoding::RandK: return randk_encode(x, seed, k);
    case Encoding::Srht: return rps_encode(x, seed, k);
    case Encoding::Wangni: return wangni_encode(x, seed, k);
    case Encoding::Induced: {
      const auto [top, rand] = induced_split(k);
      return induced_encode(x, seed, top, rand);
    }
    case Encoding::NaiveRotation: return naive_rotation_encode(x, rotation_seed_for(seed), seed, k);
  }
  throw ParameterError("encode: unknown scheme");
}

inline DenseVector decode(const EstimatorSpec& spec, std::span<const EncodedMessage> messages,
                          const DecoderConfig& config) {
  switch (spec.method) {
    case Method::RandK: return randk_decode(messages, config);
    case Method::RandKSpatial: return randk_spatial_decode(messages, config);
    case Method::RandProjSpatial: return rps_decode(messages, config);
    case Method::RandProjSubsampled: return rps_decode_with_subsampling(messages, config);
    case Method::Wangni: return wangni_decode(messages, config);
    case Method::Induced: return induced_decode(messages, config);
    case Method::NaiveRotation: return naive_rotation_decode(messages, config);
  }
  throw ParameterError("decode: unknown scheme");
}

}  // namespace dme
