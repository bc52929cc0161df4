#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "dme/error.hpp"
#include "dme/linalg.hpp"

namespace dme {

enum class TransformKind { Identity, ConstantOne, Opt, Avg };

inline std::string_view to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::Identity: return "max";
    case TransformKind::ConstantOne: return "one";
    case TransformKind::Opt: return "opt";
    case TransformKind::Avg: return "avg";
  }
  return "?";
}

inline TransformKind parse_transform_kind(std::string_view name) {
  if (name == "max" || name == "identity") return TransformKind::Identity;
  if (name == "one" || name == "constant_one") return TransformKind::ConstantOne;
  if (name == "opt") return TransformKind::Opt;
  if (name == "avg") return TransformKind::Avg;
  throw ParameterError("unknown transform kind '" + std::string(name) + "'");
}

/// Scalar map T applied to Gram eigenvalues (or coordinate hit counts).
/// Every kind satisfies T(1) = 1.
///   Identity:    T(m) = m
///   ConstantOne: T(m) = 1
///   Opt:         T(m) = 1 + R/(n-1) (m-1),  R in [-1, n-1]
///   Avg:         T(m) = 1 + (n/2)(m-1)/(n-1)
struct TransformSpec {
  TransformKind kind = TransformKind::Identity;
  std::size_t n = 1;
  double R = 0.0;

  static TransformSpec identity() { return {TransformKind::Identity, 1, 0.0}; }
  static TransformSpec constant_one() { return {TransformKind::ConstantOne, 1, 0.0}; }
  static TransformSpec avg(std::size_t n) {
    TransformSpec t{TransformKind::Avg, n, 0.0};
    t.validate();
    return t;
  }
  static TransformSpec opt(std::size_t n, double R) {
    TransformSpec t{TransformKind::Opt, n, R};
    t.validate();
    return t;
  }
  static TransformSpec make(TransformKind kind, std::size_t n, double R = 0.0) {
    TransformSpec t{kind, n, R};
    t.validate();
    return t;
  }

  void validate() const {
    if (kind == TransformKind::Opt || kind == TransformKind::Avg) {
      if (n <= 1) throw ParameterError("transform " + std::string(to_string(kind)) + " needs n >= 2");
    }
    if (kind == TransformKind::Opt) {
      const double upper = static_cast<double>(n) - 1.0;
      if (!(R >= -1.0 && R <= upper)) {
        throw ParameterError("opt transform: R=" + std::to_string(R) + " outside [-1, n-1]");
      }
    }
  }

  double operator()(double m) const {
    switch (kind) {
      case TransformKind::Identity: return m;
      case TransformKind::ConstantOne: return 1.0;
      case TransformKind::Opt: {
        validate();
        return 1.0 + (R / (static_cast<double>(n) - 1.0)) * (m - 1.0);
      }
      case TransformKind::Avg: {
        validate();
        const double nd = static_cast<double>(n);
        return 1.0 + (nd / 2.0) * (m - 1.0) / (nd - 1.0);
      }
    }
    return m;
  }

  /// "max", "opt(R=2.5)" and so on; stable across runs, used in cache keys.
  std::string label() const {
    std::string s(to_string(kind));
    if (kind == TransformKind::Opt) s += "(R=" + std::to_string(R) + ")";
    return s;
  }
};

inline double eval_transform(const TransformSpec& transform, double m) {
  if (m < 0.0) throw ParameterError("eval_transform: negative argument");
  return transform(m);
}

struct CorrelationProfile {
  double R = 0.0;
  std::size_t n = 0;
};

/// R = (sum_i sum_{l != i} <x_i, x_l>) / (sum_i ||x_i||^2).
inline CorrelationProfile measure_correlation(std::span<const DenseVector> vectors) {
  if (vectors.empty()) throw ParameterError("measure_correlation: no vectors");
  double cross = 0.0;
  double self = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    self += squared_norm(vectors[i]);
    for (std::size_t l = i + 1; l < vectors.size(); ++l) cross += 2.0 * dot(vectors[i], vectors[l]);
  }
  if (self == 0.0) throw UndefinedCorrelationError("measure_correlation: all vectors are zero");
  return {cross / self, vectors.size()};
}

}  // namespace dme
