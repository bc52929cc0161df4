#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dme/calibration.hpp"
#include "dme/eigen.hpp"
#include "dme/error.hpp"
#include "dme/estimators.hpp"
#include "dme/hadamard.hpp"
#include "dme/parallel.hpp"
#include "dme/pipeline.hpp"
#include "dme/transforms.hpp"

namespace dme {

// ----------------------------------------------------------------------------
// Correlation-controlled client vectors

struct CorrelatedVectors {
  std::vector<DenseVector> vectors;
  std::vector<std::size_t> group_sizes;  // descending
  double realized_R = 0.0;
};

/// Partition of n whose sum of g(g-1) over parts is closest to `target`,
/// preferring the smaller sum on ties and larger parts first. n <= 128.
inline std::vector<std::size_t> closest_group_sizes(std::size_t n, double target) {
  if (n == 0) throw ParameterError("closest_group_sizes: n must be positive");
  if (n > 128) throw ParameterError("closest_group_sizes: n > 128 not supported");
  const std::size_t max_sum = n * (n - 1);
  const std::size_t width = max_sum + 1;
  // reach[p][c * width + s]: c clients split into parts of size <= p can give sum s.
  std::vector<std::vector<bool>> reach(n + 1, std::vector<bool>((n + 1) * width, false));
  for (std::size_t p = 0; p <= n; ++p) reach[p][0] = true;
  for (std::size_t p = 1; p <= n; ++p) {
    const std::size_t w = p * (p - 1);
    for (std::size_t c = 0; c <= n; ++c)
      for (std::size_t s = 0; s <= max_sum; ++s) {
        bool ok = reach[p - 1][c * width + s];
        if (!ok && c >= p && s >= w) ok = reach[p][(c - p) * width + (s - w)];
        reach[p][c * width + s] = ok;
      }
  }
  std::size_t best = 0;
  double best_gap = std::abs(target);
  for (std::size_t s = 0; s <= max_sum; ++s) {
    if (!reach[n][n * width + s]) continue;
    const double gap = std::abs(static_cast<double>(s) - target);
    if (gap < best_gap) {
      best_gap = gap;
      best = s;
    }
  }
  std::vector<std::size_t> sizes;
  std::size_t c = n;
  std::size_t s = best;
  std::size_t cap = n;
  while (c > 0) {
    for (std::size_t g = std::min(cap, c); g >= 1; --g) {
      const std::size_t w = g * (g - 1);
      if (s >= w && reach[g][(c - g) * width + (s - w)]) {
        sizes.push_back(g);
        c -= g;
        s -= w;
        cap = g;
        break;
      }
    }
  }
  return sizes;
}

/// Clients in a group hold the same canonical basis vector; different groups
/// hold orthogonal ones. Group sizes realize the R closest to R_target.
inline CorrelatedVectors gen_correlated_vectors(std::size_t n, std::size_t d, double R_target, std::uint64_t seed) {
  if (n < 1) throw ParameterError("gen_correlated_vectors: n must be >= 1");
  if (!(R_target >= 0.0 && R_target <= static_cast<double>(n) - 1.0)) {
    throw ParameterError("gen_correlated_vectors: R_target outside [0, n-1]");
  }
  CorrelatedVectors out;
  out.group_sizes = closest_group_sizes(n, R_target * static_cast<double>(n));
  if (out.group_sizes.size() > d) {
    throw ParameterError("gen_correlated_vectors: " + std::to_string(out.group_sizes.size()) +
                         " groups need more than d=" + std::to_string(d) + " basis vectors");
  }
  CounterRng rng(SketchSeed{seed, 0, 0}, StreamDomain::kData);
  const auto basis = sample_without_replacement(rng, d, out.group_sizes.size());
  std::size_t cross = 0;
  for (std::size_t g = 0; g < out.group_sizes.size(); ++g) {
    cross += out.group_sizes[g] * (out.group_sizes[g] - 1);
    for (std::size_t c = 0; c < out.group_sizes[g]; ++c) {
      DenseVector e(d, 0.0);
      e[basis[g]] = 1.0;
      out.vectors.push_back(std::move(e));
    }
  }
  out.realized_R = static_cast<double>(cross) / static_cast<double>(n);
  return out;
}

// ----------------------------------------------------------------------------
// Statistics

struct SampleStats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation
  std::size_t count = 0;

  double standard_error() const { return count > 0 ? std / std::sqrt(static_cast<double>(count)) : 0.0; }
};

inline SampleStats summarize(std::span<const double> values) {
  SampleStats s;
  s.count = values.size();
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double var = 0.0;
    for (double v : values) var += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(var / static_cast<double>(values.size() - 1));
  }
  return s;
}

/// Statistics of a[t] - b[t] over paired trials.
inline SampleStats paired_difference(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("paired_difference: length mismatch");
  std::vector<double> diff(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) diff[t] = a[t] - b[t];
  return summarize(diff);
}

// ----------------------------------------------------------------------------
// MSE experiments

struct ExperimentConfig {
  std::vector<std::string> schemes;
  std::size_t n = 4;
  std::size_t d = 64;
  std::size_t k = 4;
  double correlation_R = 0.0;
  std::size_t trials = 1000;
  std::uint64_t master_seed = 0;
  std::size_t beta_trials = 1000;
  std::size_t workers = 0;
  /// Explicit client vectors; replaces the correlation construction.
  std::optional<std::vector<DenseVector>> vectors;
};

struct SchemeResult {
  std::string scheme;
  double mse_mean = 0.0;
  double mse_std = 0.0;
  std::size_t trials = 0;
  double beta_bar = 1.0;
  std::vector<double> squared_errors;  // per trial, paired across schemes
};

struct MseReport {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  double R_target = 0.0;
  double realized_R = 0.0;
  double mean_norm = 0.0;  // ||x_bar||
  std::vector<SchemeResult> schemes;

  const SchemeResult& at(const std::string& name) const {
    for (const auto& s : schemes)
      if (s.scheme == name) return s;
    throw ParameterError("MseReport: no scheme " + name);
  }
};

using BetaTable = std::map<std::string, double>;

/// The client vectors and realized correlation an experiment runs on.
inline CorrelatedVectors experiment_vectors(const ExperimentConfig& config) {
  if (config.vectors) {
    CorrelatedVectors cv;
    cv.vectors = *config.vectors;
    if (cv.vectors.size() != config.n) throw ParameterError("experiment: explicit vectors must number n");
    cv.realized_R = measure_correlation(cv.vectors).R;
    return cv;
  }
  return gen_correlated_vectors(config.n, config.d, config.correlation_R, config.master_seed);
}

/// Estimators named in the config, with Opt using the realized correlation.
inline std::vector<EstimatorSpec> experiment_estimators(const ExperimentConfig& config, double realized_R) {
  std::vector<EstimatorSpec> specs;
  for (const auto& name : config.schemes) specs.push_back(make_estimator(name, config.n, realized_R));
  return specs;
}

/// Calibrates every scheme in the config that needs a scale.
inline BetaTable calibrate_schemes(const ExperimentConfig& config) {
  const auto cv = experiment_vectors(config);
  BetaTable betas;
  for (const auto& spec : experiment_estimators(config, cv.realized_R)) {
    if (!spec.needs_beta()) continue;
    betas[spec.name()] =
        calibrate_beta(spec, config.n, config.d, config.k, config.beta_trials, config.master_seed, config.workers)
            .beta_bar;
  }
  return betas;
}

/// Paired Monte-Carlo squared error ||x_hat - x_bar||^2 of every scheme.
inline MseReport run_mse_experiment(const ExperimentConfig& config, const BetaTable& betas) {
  if (config.trials < 1) throw ParameterError("run_mse_experiment: trials must be >= 1");
  const auto cv = experiment_vectors(config);
  const auto specs = experiment_estimators(config, cv.realized_R);
  std::vector<double> beta(specs.size(), 1.0);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    if (!specs[s].needs_beta()) continue;
    const auto it = betas.find(specs[s].name());
    if (it == betas.end()) {
      throw CalibrationError("no calibrated beta for scheme " + specs[s].name() +
                             "; run the calibrate command (or calibrate_beta) first");
    }
    beta[s] = it->second;
  }
  const DenseVector mean = mean_of(cv.vectors);

  std::vector<std::vector<double>> errors(specs.size(), std::vector<double>(config.trials));
  parallel_for(config.trials, config.workers, [&](std::size_t t) {
    RoundPipeline pipeline(config.n, config.d, config.k, config.master_seed, t);
    for (std::size_t s = 0; s < specs.size(); ++s) {
      errors[s][t] = squared_distance(pipeline.run(specs[s], beta[s], cv.vectors), mean);
    }
  });

  MseReport report;
  report.n = config.n;
  report.d = config.d;
  report.k = config.k;
  report.R_target = config.correlation_R;
  report.realized_R = cv.realized_R;
  report.mean_norm = std::sqrt(squared_norm(mean));
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto stats = summarize(errors[s]);
    SchemeResult r;
    r.scheme = specs[s].name();
    r.mse_mean = stats.mean;
    r.mse_std = stats.std;
    r.trials = config.trials;
    r.beta_bar = beta[s];
    r.squared_errors = std::move(errors[s]);
    report.schemes.push_back(std::move(r));
  }
  return report;
}

// ----------------------------------------------------------------------------
// Rank of S

struct RankReport {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  std::size_t trials = 0;
  std::vector<std::size_t> histogram;  // histogram[r] = trials with rank r

  std::size_t full_rank() const { return std::min(n * k, d); }
  /// P(rank < full rank).
  double delta() const {
    std::size_t deficient = 0;
    for (std::size_t r = 0; r < full_rank(); ++r) deficient += histogram[r];
    return static_cast<double>(deficient) / static_cast<double>(trials);
  }
  /// P(rank == c).
  double delta_c(std::size_t c) const {
    return c < histogram.size() ? static_cast<double>(histogram[c]) / static_cast<double>(trials) : 0.0;
  }
};

/// Histogram of rank(S) for S = sum of n independent SRHT Gram matrices. The
/// rank is read from the stacked-row Gram matrix, which has the same nonzero
/// spectrum as S.
inline RankReport run_rank_experiment(std::size_t n, std::size_t d, std::size_t k, std::size_t trials,
                                      std::uint64_t seed, std::size_t workers = 0) {
  if (!is_power_of_two(d)) throw DimensionError("run_rank_experiment: d must be a power of 2");
  if (k < 1 || k > d || n < 1 || trials < 1) throw ParameterError("run_rank_experiment: bad parameters");
  std::vector<std::size_t> ranks(trials);
  const double tol = default_rank_tol(d);
  parallel_for(trials, workers, [&](std::size_t t) {
    std::vector<Sketch> sketches;
    sketches.reserve(n);
    for (std::size_t i = 0; i < n; ++i) sketches.push_back(derive_sketch({seed, i, t}, d, k));
    if (n * k <= d) {
      ranks[t] = numerical_rank(eigh(stacked_row_gram(sketches)).eigenvalues, tol);
    } else {
      ranks[t] = numerical_rank(eigh(accumulate_gram(sketches)).eigenvalues, tol);
    }
  });
  RankReport report{n, d, k, trials, std::vector<std::size_t>(std::min(n * k, d) + 1, 0)};
  for (auto r : ranks) ++report.histogram[r];
  return report;
}

// ----------------------------------------------------------------------------
// Oversampled regime

struct LimitReport {
  MseReport mse;
  double ratio = 0.0;  // MSE(rand_k_spatial_max) / MSE(rand_k)
};

/// Rand-k-Spatial(Max) against Rand-k on orthogonal unit vectors when nk >= 4d.
inline LimitReport run_limit_experiment(std::size_t n, std::size_t d, std::size_t k, std::size_t trials,
                                        std::uint64_t seed, std::size_t beta_trials = 1000, std::size_t workers = 0) {
  if (n * k < 4 * d) throw ParameterError("run_limit_experiment: requires nk >= 4d");
  if (n > d) throw ParameterError("run_limit_experiment: orthogonal vectors need n <= d");
  ExperimentConfig config;
  config.schemes = {"rand_k_spatial_max", "rand_k"};
  config.n = n;
  config.d = d;
  config.k = k;
  config.correlation_R = 0.0;
  config.trials = trials;
  config.master_seed = seed;
  config.beta_trials = beta_trials;
  config.workers = workers;
  LimitReport out;
  out.mse = run_mse_experiment(config, calibrate_schemes(config));
  const double base = out.mse.at("rand_k").mse_mean;
  out.ratio = base > 0.0 ? out.mse.at("rand_k_spatial_max").mse_mean / base : 1.0;
  return out;
}

}  // namespace dme
