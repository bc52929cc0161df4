#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dme/data.hpp"
#include "dme/eigen.hpp"
#include "dme/error.hpp"
#include "dme/estimators.hpp"
#include "dme/hadamard.hpp"
#include "dme/linalg.hpp"
#include "dme/pipeline.hpp"
#include "dme/random.hpp"

namespace dme {

struct TaskEstimator {
  EstimatorSpec spec;
  std::size_t k = 1;
  double beta_bar = 1.0;
  std::uint64_t master_seed = 0;
  /// When positive and the scheme needs a scale, beta_bar is ignored and
  /// estimated from this many extra leading rounds, which advance the task
  /// with the exact mean and are not recorded.
  std::size_t warmup_rounds = 0;
};

struct TaskState {
  std::size_t round = 0;
  std::vector<DenseVector> iterate;  // one vector, or one per centroid
  double est_sq_error = 0.0;
  double task_loss = 0.0;
  std::size_t empty_clusters = 0;  // client/cluster pairs that sent a zero vector
  bool normalization_failed = false;
  bool diverged = false;
};

using TaskHistory = std::vector<TaskState>;

inline double cumulative_est_error(const TaskHistory& h) {
  double s = 0.0;
  for (const auto& st : h) s += st.est_sq_error;
  return s;
}

namespace detail {

/// Runs the mean-estimation step of a task round. Instance `c` of round `r`
/// uses round index r * instances + c, so every estimate has fresh seeds.
class TaskMeanEstimator {
 public:
  TaskMeanEstimator(const TaskEstimator& est, std::size_t n, std::size_t d, std::size_t instances)
      : est_(est), n_(n), d_(d), instances_(instances) {
    if (est.k < 1 || est.k > d) throw ParameterError("task: k must be in [1, d]");
    if (n < 1) throw ParameterError("task: need at least one client");
    beta_ = est.beta_bar;
    warming_ = est.warmup_rounds > 0 && est.spec.needs_beta();
  }

  bool warming() const noexcept { return warming_; }

  DenseVector estimate(std::size_t round, std::size_t instance, std::span<const DenseVector> clients) {
    RoundPipeline pipeline(n_, d_, est_.k, est_.master_seed, round * instances_ + instance);
    if (!warming_) return pipeline.run(est_.spec, beta_, clients);
    const DenseVector mean = mean_of(clients);
    const DenseVector raw = pipeline.run(est_.spec, 1.0, clients);
    warm_num_ += squared_norm(mean);
    warm_den_ += dot(mean, raw);
    return mean;
  }

  void end_warmup() {
    if (!warming_) return;
    if (!(warm_den_ > 0.0)) throw CalibrationError("task warm-up: non-positive mean response, cannot set beta");
    beta_ = warm_num_ / warm_den_;
    warming_ = false;
  }

  double beta() const noexcept { return beta_; }

 private:
  TaskEstimator est_;
  std::size_t n_, d_, instances_;
  double beta_ = 1.0;
  bool warming_ = false;
  double warm_num_ = 0.0;
  double warm_den_ = 0.0;
};

inline void check_partition(const Dataset& ds, const ClientPartition& p) {
  ds.validate();
  if (p.num_clients() < 1) throw ParameterError("task: partition has no clients");
  for (const auto& c : p.clients) {
    if (c.empty()) throw ParameterError("task: a client holds no samples");
    for (auto i : c)
      if (i >= ds.size()) throw ParameterError("task: partition index out of range");
  }
}

inline DenseVector column_mean(const Dataset& ds) {
  DenseVector mu(ds.dim(), 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto r = ds.features.row(i);
    for (std::size_t j = 0; j < mu.size(); ++j) mu[j] += r[j];
  }
  for (double& v : mu) v /= static_cast<double>(ds.size());
  return mu;
}

inline std::size_t total_rounds(const TaskEstimator& est, std::size_t rounds) {
  return (est.warmup_rounds > 0 && est.spec.needs_beta() ? est.warmup_rounds : 0) + rounds;
}

}  // namespace detail

// ----------------------------------------------------------------------------
// Power iteration

/// Shared random unit starting vector.
inline DenseVector power_iteration_start(std::size_t d, std::uint64_t seed) {
  CounterRng rng(SketchSeed{seed, kSharedClient, 0}, StreamDomain::kData);
  DenseVector v(d);
  for (double& x : v) x = rng.normal();
  const double nv = std::sqrt(squared_norm(v));
  for (double& x : v) x /= nv;
  return v;
}

/// Data are centered by the pooled mean. Client i sends C_i v with
/// C_i = X_i^T X_i / m_i; the server normalizes the decoded mean. The loss is
/// ||v_t - v_top|| after flipping v_t onto the side of v_top.
inline TaskHistory run_power_iteration(const Dataset& ds, const ClientPartition& partition, const TaskEstimator& est,
                                       std::size_t rounds, std::uint64_t init_seed = 0) {
  if (rounds < 1) throw ParameterError("run_power_iteration: rounds must be >= 1");
  detail::check_partition(ds, partition);
  const std::size_t n = partition.num_clients(), d = ds.dim();
  const DenseVector mu = detail::column_mean(ds);
  std::vector<Matrix> local;
  for (const auto& idx : partition.clients) {
    Matrix x = client_features(ds, idx);
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t j = 0; j < d; ++j) x(r, j) -= mu[j];
    local.push_back(std::move(x));
  }

  SymmetricMatrix cov(d);
  for (const auto& x : local)
    for (std::size_t r = 0; r < x.rows(); ++r) cov.add_outer(x.row(r), 1.0 / static_cast<double>(ds.size()));
  const auto eig = eigh(cov);
  DenseVector v_top(d);
  for (std::size_t j = 0; j < d; ++j) v_top[j] = eig.eigenvectors(j, 0);

  auto loss_of = [&](const DenseVector& v) {
    const double sign = dot(v, v_top) < 0.0 ? -1.0 : 1.0;
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += (sign * v[j] - v_top[j]) * (sign * v[j] - v_top[j]);
    return std::sqrt(s);
  };

  detail::TaskMeanEstimator dme(est, n, d, 1);
  DenseVector v = power_iteration_start(d, init_seed);
  TaskHistory history;
  const std::size_t total = detail::total_rounds(est, rounds);
  for (std::size_t t = 0; t < total; ++t) {
    if (dme.warming() && t == total - rounds) dme.end_warmup();
    std::vector<DenseVector> msgs;
    for (const auto& x : local) {
      DenseVector xv = x.multiply(v);
      DenseVector cv = x.transpose().multiply(xv);
      for (double& c : cv) c /= static_cast<double>(x.rows());
      msgs.push_back(std::move(cv));
    }
    const DenseVector mean = mean_of(msgs);
    const DenseVector est_mean = dme.estimate(t, 0, msgs);
    TaskState st;
    st.est_sq_error = squared_distance(est_mean, mean);
    const double norm = std::sqrt(squared_norm(est_mean));
    if (norm > 0.0 && std::isfinite(norm)) {
      for (std::size_t j = 0; j < d; ++j) v[j] = est_mean[j] / norm;
    } else {
      st.normalization_failed = true;
    }
    if (t < total - rounds) continue;
    st.round = t - (total - rounds);
    st.iterate = {v};
    st.task_loss = loss_of(v);
    history.push_back(std::move(st));
  }
  return history;
}

// ----------------------------------------------------------------------------
// k-means

inline std::size_t nearest_centroid(std::span<const double> x, const std::vector<DenseVector>& centroids) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double dist = squared_distance(x, centroids[c]);
    if (dist < best_d) {
      best_d = dist;
      best = c;
    }
  }
  return best;
}

inline double kmeans_loss(const Dataset& ds, const std::vector<DenseVector>& centroids) {
  double s = 0.0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto x = ds.features.row(i);
    s += squared_distance(x, centroids[nearest_centroid(x, centroids)]);
  }
  return s;
}

/// num_clusters distinct pooled samples chosen with a shared seed.
inline std::vector<DenseVector> kmeans_init(const Dataset& ds, std::size_t num_clusters, std::uint64_t seed) {
  if (num_clusters < 2) throw ParameterError("kmeans: need at least two clusters");
  if (num_clusters > ds.size()) throw ParameterError("kmeans: more clusters than samples");
  CounterRng rng(SketchSeed{seed, kSharedClient, 1}, StreamDomain::kData);
  std::vector<DenseVector> out;
  for (auto i : sample_without_replacement(rng, ds.size(), num_clusters)) out.push_back(ds.sample(i));
  return out;
}

/// Each client runs one Lloyd step locally and sends its centroid means, one
/// estimation instance per centroid. An empty local cluster sends zeros.
inline TaskHistory run_kmeans(const Dataset& ds, const ClientPartition& partition, const TaskEstimator& est,
                              std::size_t num_clusters, std::size_t rounds, std::uint64_t init_seed = 0) {
  if (rounds < 1) throw ParameterError("run_kmeans: rounds must be >= 1");
  detail::check_partition(ds, partition);
  const std::size_t n = partition.num_clients(), d = ds.dim();
  std::vector<DenseVector> centroids = kmeans_init(ds, num_clusters, init_seed);
  detail::TaskMeanEstimator dme(est, n, d, num_clusters);
  TaskHistory history;
  const std::size_t total = detail::total_rounds(est, rounds);
  for (std::size_t t = 0; t < total; ++t) {
    if (dme.warming() && t == total - rounds) dme.end_warmup();
    TaskState st;
    // local[c][i]: client i's mean of the points nearest centroid c
    std::vector<std::vector<DenseVector>> local(num_clusters, std::vector<DenseVector>(n, DenseVector(d, 0.0)));
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::size_t> count(num_clusters, 0);
      for (auto idx : partition.clients[i]) {
        const auto x = ds.features.row(idx);
        const std::size_t c = nearest_centroid(x, centroids);
        ++count[c];
        for (std::size_t j = 0; j < d; ++j) local[c][i][j] += x[j];
      }
      for (std::size_t c = 0; c < num_clusters; ++c) {
        if (count[c] == 0) {
          ++st.empty_clusters;
          continue;
        }
        for (double& v : local[c][i]) v /= static_cast<double>(count[c]);
      }
    }
    double err = 0.0;
    for (std::size_t c = 0; c < num_clusters; ++c) {
      const DenseVector mean = mean_of(local[c]);
      DenseVector estimate = dme.estimate(t, c, local[c]);
      err += squared_distance(estimate, mean);
      centroids[c] = std::move(estimate);
    }
    if (t < total - rounds) continue;
    st.round = t - (total - rounds);
    st.est_sq_error = err / static_cast<double>(num_clusters);
    st.task_loss = kmeans_loss(ds, centroids);
    st.iterate = centroids;
    history.push_back(std::move(st));
  }
  return history;
}

// ----------------------------------------------------------------------------
// Linear regression

/// Gradient of (1 / 2m) ||X w - y||^2 over the given rows.
inline DenseVector least_squares_gradient(const Matrix& x, std::span<const double> y, std::span<const double> w) {
  DenseVector r = x.multiply(w);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= y[i];
  DenseVector g = x.transpose().multiply(r);
  for (double& v : g) v /= static_cast<double>(x.rows());
  return g;
}

inline double least_squares_loss(const Matrix& x, std::span<const double> y, std::span<const double> w) {
  const DenseVector p = x.multiply(w);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - y[i]) * (p[i] - y[i]);
  return s / (2.0 * static_cast<double>(x.rows()));
}

inline constexpr double kDivergenceLoss = 1e12;

/// Full-batch gradient descent from w = 0 on the mean of the clients' local
/// gradients. Stops early once the training loss exceeds kDivergenceLoss.
inline TaskHistory run_linreg(const Dataset& ds, const ClientPartition& partition, const TaskEstimator& est,
                              std::size_t rounds, double learning_rate) {
  if (rounds < 1) throw ParameterError("run_linreg: rounds must be >= 1");
  if (!(learning_rate > 0.0)) throw ParameterError("run_linreg: learning_rate must be positive");
  if (ds.label_kind != LabelKind::Target) throw ParameterError("run_linreg: dataset needs regression targets");
  detail::check_partition(ds, partition);
  const std::size_t n = partition.num_clients(), d = ds.dim();
  std::vector<Matrix> xs;
  std::vector<DenseVector> ys;
  for (const auto& idx : partition.clients) {
    xs.push_back(client_features(ds, idx));
    DenseVector y;
    for (auto i : idx) y.push_back(ds.labels[i]);
    ys.push_back(std::move(y));
  }

  detail::TaskMeanEstimator dme(est, n, d, 1);
  DenseVector w(d, 0.0);
  TaskHistory history;
  const std::size_t total = detail::total_rounds(est, rounds);
  for (std::size_t t = 0; t < total; ++t) {
    if (dme.warming() && t == total - rounds) dme.end_warmup();
    std::vector<DenseVector> grads;
    for (std::size_t i = 0; i < n; ++i) grads.push_back(least_squares_gradient(xs[i], ys[i], w));
    const DenseVector mean = mean_of(grads);
    const DenseVector g = dme.estimate(t, 0, grads);
    for (std::size_t j = 0; j < d; ++j) w[j] -= learning_rate * g[j];
    if (t < total - rounds) continue;
    TaskState st;
    st.round = t - (total - rounds);
    st.est_sq_error = squared_distance(g, mean);
    st.task_loss = least_squares_loss(ds.features, ds.labels, w);
    st.iterate = {w};
    st.diverged = !(st.task_loss <= kDivergenceLoss);
    history.push_back(std::move(st));
    if (history.back().diverged) break;
  }
  return history;
}

}  // namespace dme
