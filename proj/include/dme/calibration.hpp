#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dme/error.hpp"
#include "dme/estimators.hpp"
#include "dme/parallel.hpp"
#include "dme/pipeline.hpp"
#include "dme/random.hpp"

namespace dme {

struct CalibrationResult {
  double beta_bar = 1.0;
  std::size_t trials = 0;
  /// (max - min) / mean of the per-probe scales. Zero when the mean decode map
  /// is exactly a multiple of the identity.
  double probe_residual = 0.0;
  /// Delta-method standard error of beta_bar.
  double standard_error = 0.0;

  bool warning() const { return probe_residual > 0.05; }
};

/// Seed stream for calibration, kept apart from experiment seeds.
inline std::uint64_t calibration_master(std::uint64_t master_seed) {
  return mix64(master_seed ^ static_cast<std::uint64_t>(StreamDomain::kCalibration));
}

/// Probe vectors: the first min(d, 8) canonical basis vectors and one random
/// unit vector.
inline std::vector<DenseVector> calibration_probes(std::size_t d, std::uint64_t master_seed) {
  std::vector<DenseVector> probes;
  for (std::size_t j = 0; j < std::min<std::size_t>(d, 8); ++j) {
    DenseVector e(d, 0.0);
    e[j] = 1.0;
    probes.push_back(std::move(e));
  }
  CounterRng rng(SketchSeed{master_seed, 0, 0}, StreamDomain::kCalibration);
  DenseVector u(d);
  for (double& v : u) v = rng.normal();
  const double norm = std::sqrt(squared_norm(u));
  for (double& v : u) v /= norm;
  probes.push_back(std::move(u));
  return probes;
}

/// Monte-Carlo estimate of the scale beta that makes the decoder unbiased.
/// Runs encode -> decode with beta = 1 on n identical copies of each probe u
/// and sets beta_u = <u,u> / <u, mean decode(u)>. Plain Rand-k is calibrated
/// through the Rand-k-Spatial decoder with the given transform.
inline CalibrationResult calibrate_beta(EstimatorSpec spec, std::size_t n, std::size_t d, std::size_t k,
                                        std::size_t trials, std::uint64_t master_seed, std::size_t workers = 0) {
  if (trials < 100) throw ParameterError("calibrate_beta: need at least 100 trials");
  if (spec.method == Method::RandK) spec.method = Method::RandKSpatial;
  const auto probes = calibration_probes(d, master_seed);
  const std::size_t p = probes.size();
  const std::uint64_t seed_base = calibration_master(master_seed);

  std::vector<double> values(trials * p);
  parallel_for(trials, workers, [&](std::size_t t) {
    RoundPipeline pipeline(n, d, k, seed_base, t);
    for (std::size_t q = 0; q < p; ++q) {
      const std::vector<DenseVector> clients(n, probes[q]);
      values[t * p + q] = dot(probes[q], pipeline.run(spec, 1.0, clients));
    }
  });

  std::vector<double> mean(p, 0.0);
  for (std::size_t t = 0; t < trials; ++t)
    for (std::size_t q = 0; q < p; ++q) mean[q] += values[t * p + q];
  for (double& m : mean) m /= static_cast<double>(trials);

  std::vector<double> scale(p);
  for (std::size_t q = 0; q < p; ++q) {
    if (!(mean[q] > 0.0)) {
      throw CalibrationError("calibrate_beta: probe " + std::to_string(q) + " has non-positive mean response " +
                             std::to_string(mean[q]) + " for " + spec.name());
    }
    scale[q] = squared_norm(probes[q]) / mean[q];
  }
  CalibrationResult result;
  result.trials = trials;
  double sum = 0.0;
  for (double s : scale) sum += s;
  result.beta_bar = sum / static_cast<double>(p);
  const auto [lo, hi] = std::minmax_element(scale.begin(), scale.end());
  result.probe_residual = (*hi - *lo) / result.beta_bar;

  // Per-trial probe-averaged response a_t; beta ~ 1 / mean(a).
  double a_mean = 0.0;
  std::vector<double> a(trials, 0.0);
  for (std::size_t t = 0; t < trials; ++t) {
    for (std::size_t q = 0; q < p; ++q) a[t] += values[t * p + q];
    a[t] /= static_cast<double>(p);
    a_mean += a[t];
  }
  a_mean /= static_cast<double>(trials);
  double var = 0.0;
  for (double v : a) var += (v - a_mean) * (v - a_mean);
  var /= static_cast<double>(trials - 1);
  result.standard_error = std::sqrt(var / static_cast<double>(trials)) / (a_mean * a_mean);
  return result;
}

// ----------------------------------------------------------------------------
// Plain-text cache of calibrated scales.

struct BetaCacheEntry {
  std::string scheme;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t k = 0;
  std::string transform_kind;
  std::optional<double> R;  // Opt only
  std::uint64_t master_seed = 0;
  std::size_t trials = 0;
  double beta_bar = 0.0;

  bool same_key(const BetaCacheEntry& o) const {
    return scheme == o.scheme && n == o.n && d == o.d && k == o.k && transform_kind == o.transform_kind && R == o.R &&
           master_seed == o.master_seed;
  }
};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// One entry per line, tab-separated:
///   scheme n d k transform_kind R-or-empty master_seed trials beta_bar
class BetaCache {
 public:
  static constexpr const char* kFileName = "beta_cache.tsv";

  /// $DME_CACHE_DIR/beta_cache.tsv, or ./beta_cache.tsv when unset.
  static std::filesystem::path default_path() {
    const char* dir = std::getenv("DME_CACHE_DIR");
    return std::filesystem::path(dir && *dir ? dir : ".") / kFileName;
  }

  static BetaCacheEntry make_key(const EstimatorSpec& spec, std::size_t n, std::size_t d, std::size_t k,
                                 std::uint64_t master_seed) {
    BetaCacheEntry e;
    e.scheme = spec.name();
    e.n = n;
    e.d = d;
    e.k = k;
    e.transform_kind = std::string(to_string(spec.transform.kind));
    if (spec.transform.kind == TransformKind::Opt) e.R = spec.transform.R;
    e.master_seed = master_seed;
    return e;
  }

  static BetaCache load(const std::filesystem::path& path) {
    BetaCache cache;
    std::ifstream in(path);
    if (!in) return cache;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      std::vector<std::string> fields;
      std::stringstream ss(line);
      std::string field;
      while (std::getline(ss, field, '\t')) fields.push_back(field);
      if (line.back() == '\t') fields.emplace_back();
      if (fields.size() != 9) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 9 tab-separated fields");
      }
      try {
        BetaCacheEntry e;
        e.scheme = fields[0];
        e.n = std::stoull(fields[1]);
        e.d = std::stoull(fields[2]);
        e.k = std::stoull(fields[3]);
        e.transform_kind = fields[4];
        if (!fields[5].empty()) e.R = std::stod(fields[5]);
        e.master_seed = std::stoull(fields[6]);
        e.trials = std::stoull(fields[7]);
        e.beta_bar = std::stod(fields[8]);
        cache.entries_.push_back(std::move(e));
      } catch (const std::logic_error&) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": malformed numeric field");
      }
    }
    return cache;
  }

  /// Writes to a sibling temporary file and renames it over `path`.
  void save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
      std::ofstream out(tmp, std::ios::trunc);
      if (!out) throw Error("cannot write beta cache " + tmp.string());
      for (const auto& e : entries_) {
        out << e.scheme << '\t' << e.n << '\t' << e.d << '\t' << e.k << '\t' << e.transform_kind << '\t'
            << (e.R ? format_double(*e.R) : std::string()) << '\t' << e.master_seed << '\t' << e.trials << '\t'
            << format_double(e.beta_bar) << '\n';
      }
      if (!out) throw Error("failed writing beta cache " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
  }

  /// An entry with the same key and at least `min_trials` trials.
  std::optional<BetaCacheEntry> find(const BetaCacheEntry& key, std::size_t min_trials) const {
    for (const auto& e : entries_)
      if (e.same_key(key) && e.trials >= min_trials) return e;
    return std::nullopt;
  }

  void store(BetaCacheEntry entry) {
    for (auto& e : entries_) {
      if (e.same_key(entry)) {
        e = std::move(entry);
        return;
      }
    }
    entries_.push_back(std::move(entry));
  }

  const std::vector<BetaCacheEntry>& entries() const noexcept { return entries_; }

 private:
  std::vector<BetaCacheEntry> entries_;
};

}  // namespace dme
