#pragma once

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dme/calibration.hpp"
#include "dme/data.hpp"
#include "dme/error.hpp"
#include "dme/harness.hpp"
#include "dme/parallel.hpp"
#include "dme/tasks.hpp"

namespace dme::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

struct UsageError : Error {
  using Error::Error;
};

struct RunConfig {
  std::string command;
  std::vector<std::string> schemes;  // empty: command default
  std::size_t n = 4;
  std::size_t d = 64;
  std::size_t k = 4;
  double R = 0.0;
  std::size_t trials = 1000;
  std::size_t rounds = 30;
  std::size_t repetitions = 1;
  std::uint64_t seed = 0;
  std::size_t beta_trials = 10000;
  std::string dataset;  // IDX images or delimited text; empty: synthetic
  std::string labels;   // IDX labels for image datasets
  std::string synthetic;  // empty: task default
  std::size_t samples = 1000;
  std::string split = "iid";
  std::size_t clusters = 10;
  double learning_rate = 0.1;
  std::size_t resize = 0;
  std::size_t features = 0;  // delimited text: 0 means all but the target
  std::string target;        // delimited text: column name or index; empty: last
  std::string separator = ",";
  std::size_t warmup = 0;
  std::string partition_out;
  std::string output = "-";
  std::size_t workers = 0;
};

inline std::vector<std::string> default_schemes(const std::string& command) {
  if (command == "mse") return {"rand_k", "rand_k_spatial_opt", "rps_opt"};
  if (command == "calibrate") return {"rand_k_spatial_max", "rps_max"};
  return {"rand_k", "rand_k_spatial_avg", "rps_avg", "wangni", "induced"};
}

inline bool is_task(const std::string& c) { return c == "power" || c == "kmeans" || c == "linreg"; }

inline std::string usage_text() {
  return "usage: dme_sim <calibrate|mse|rank|limit|power|kmeans|linreg> [options]\n"
         "       dme_sim --help for the option list\n";
}

namespace detail {

inline void build_app(CLI::App& app, RunConfig& c) {
  app.add_option("command", c.command, "calibrate, mse, rank, limit, power, kmeans or linreg")
      ->required()
      ->check(CLI::IsMember({"calibrate", "mse", "rank", "limit", "power", "kmeans", "linreg"}));
  app.add_option("--scheme", c.schemes, "comma-separated scheme names")->delimiter(',');
  app.add_option("--n", c.n, "number of clients")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--d", c.d, "dimension (synthetic data and MSE experiments)")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--k", c.k, "per-client budget")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--R", c.R, "target correlation for mse; R for Opt transforms")->capture_default_str();
  app.add_option("--trials", c.trials, "Monte-Carlo trials")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--rounds", c.rounds, "task rounds")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--repetitions", c.repetitions, "independent task runs")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--seed", c.seed, "master seed")->capture_default_str();
  app.add_option("--beta-trials", c.beta_trials, "calibration trials")->capture_default_str()->check(CLI::Range(100ul, ~0ul));
  app.add_option("--dataset", c.dataset, "IDX image file or delimited text file")->check(CLI::ExistingFile);
  app.add_option("--labels", c.labels, "IDX label file")->check(CLI::ExistingFile);
  app.add_option("--synthetic", c.synthetic, "spiked_covariance, blobs or linear")
      ->check(CLI::IsMember({"spiked_covariance", "blobs", "linear"}));
  app.add_option("--samples", c.samples, "synthetic sample count")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--split", c.split, "iid or noniid")->capture_default_str()->check(CLI::IsMember({"iid", "noniid"}));
  app.add_option("--clusters", c.clusters, "k-means clusters")->capture_default_str()->check(CLI::Range(2ul, ~0ul));
  app.add_option("--lr", c.learning_rate, "linear regression step size")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--resize", c.resize, "resize IDX images to this side length (0 keeps)")->capture_default_str();
  app.add_option("--features", c.features, "delimited text: leading feature columns (0: all but target)")->capture_default_str();
  app.add_option("--target", c.target, "delimited text: target column name or index (default: last)");
  app.add_option("--separator", c.separator, "delimited text separator")->capture_default_str();
  app.add_option("--warmup", c.warmup, "estimate beta from this many leading task rounds")->capture_default_str();
  app.add_option("--partition-out", c.partition_out, "write the client partition here");
  app.add_option("--output", c.output, "CSV output path, - for stdout")->capture_default_str();
  app.add_option("--workers", c.workers, "worker threads (0: available parallelism)")->capture_default_str();
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.allow_config_extras(false);
}

inline void check_writable_parent(const std::string& path, const char* what) {
  if (path.empty() || path == "-") return;
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty() && !std::filesystem::is_directory(parent)) {
    throw UsageError(std::string(what) + ": directory does not exist: " + parent.string());
  }
}

}  // namespace detail

/// Checks that do not need any computation.
inline void validate(RunConfig& c) {
  if (c.schemes.empty()) c.schemes = default_schemes(c.command);
  if (c.separator.size() != 1) throw UsageError("--separator must be a single character");
  if (c.command != "rank" && c.command != "limit") {
    for (const auto& s : c.schemes) {
      try {
        const auto spec = make_estimator(s, c.n, c.R);
        spec.transform.validate();
        if (spec.encoding() == Encoding::Srht || spec.encoding() == Encoding::NaiveRotation) {
          if (!is_task(c.command) && !is_power_of_two(c.d)) throw UsageError("scheme " + s + " needs --d a power of 2");
        }
      } catch (const UsageError&) {
        throw;
      } catch (const Error& e) {
        throw UsageError(std::string("--scheme: ") + e.what());
      }
    }
  }
  if (!is_task(c.command) && c.k > c.d) throw UsageError("--k must not exceed --d");
  if (c.command == "rank" && !is_power_of_two(c.d)) throw UsageError("rank needs --d a power of 2");
  if (c.command == "limit" && c.n * c.k < 4 * c.d) throw UsageError("limit needs n*k >= 4*d");
  if (!c.labels.empty() && c.dataset.empty()) throw UsageError("--labels needs --dataset");
  detail::check_writable_parent(c.output, "--output");
  detail::check_writable_parent(c.partition_out, "--partition-out");
  if (!c.dataset.empty() && !c.synthetic.empty()) throw UsageError("--dataset and --synthetic are exclusive");
}

/// Parses argv (argv[0] is the program name). Throws CLI::ParseError or
/// UsageError on bad input; CLI::CallForHelp when help was requested.
inline RunConfig parse_config(int argc, const char* const* argv) {
  RunConfig c;
  CLI::App app{"Distributed mean estimation simulator", "dme_sim"};
  detail::build_app(app, c);
  app.parse(argc, argv);
  validate(c);
  return c;
}

// ----------------------------------------------------------------------------
// Execution

namespace detail {

inline std::string fmt(double v) { return format_double(v); }

/// Returns the cached beta for (scheme, n, d, k, seed) when calibrated with at
/// least beta_trials trials, otherwise calibrates and stores it.
inline double cached_beta(BetaCache& cache, const EstimatorSpec& spec, const RunConfig& c, std::size_t n,
                          std::size_t d, std::size_t k, bool& dirty, std::size_t* trials_used = nullptr) {
  auto key = BetaCache::make_key(spec, n, d, k, c.seed);
  if (auto hit = cache.find(key, c.beta_trials)) {
    if (trials_used) *trials_used = hit->trials;
    return hit->beta_bar;
  }
  const auto res = calibrate_beta(spec, n, d, k, c.beta_trials, c.seed, c.workers);
  if (res.warning()) {
    std::cerr << "warning: " << spec.name() << " probe residual " << res.probe_residual
              << " exceeds 0.05; the mean decode map is not close to a multiple of the identity\n";
  }
  key.trials = res.trials;
  key.beta_bar = res.beta_bar;
  cache.store(key);
  dirty = true;
  if (trials_used) *trials_used = res.trials;
  return res.beta_bar;
}

class Output {
 public:
  explicit Output(const std::string& path) : to_stdout_(path == "-") {
    if (!to_stdout_) {
      file_.open(path, std::ios::trunc);
      if (!file_) throw Error("cannot open output " + path);
    }
  }
  std::ostream& csv() { return to_stdout_ ? std::cout : file_; }
  std::ostream& summary() { return to_stdout_ ? std::cerr : std::cout; }

 private:
  bool to_stdout_;
  std::ofstream file_;
};

inline int run_calibrate(const RunConfig& c) {
  const auto path = BetaCache::default_path();
  BetaCache cache = BetaCache::load(path);
  bool dirty = false;
  Output out(c.output);
  out.csv() << "scheme,n,d,k,transform,R,trials,beta_bar\n";
  for (const auto& s : c.schemes) {
    const auto spec = make_estimator(s, c.n, c.R);
    if (!spec.needs_beta()) {
      out.summary() << spec.name() << ": no scale needed\n";
      continue;
    }
    std::size_t used = 0;
    const double beta = cached_beta(cache, spec, c, c.n, c.d, c.k, dirty, &used);
    out.csv() << spec.name() << ',' << c.n << ',' << c.d << ',' << c.k << ',' << to_string(spec.transform.kind) << ','
              << (spec.transform.kind == TransformKind::Opt ? fmt(spec.transform.R) : "") << ',' << used << ','
              << fmt(beta) << '\n';
    out.summary() << spec.name() << ": beta_bar = " << fmt(beta) << " (" << used << " trials)\n";
  }
  if (dirty) cache.save(path);
  return kExitOk;
}

inline void write_mse_rows(std::ostream& os, const MseReport& r, double R_target) {
  for (const auto& s : r.schemes) {
    os << s.scheme << ',' << fmt(R_target) << ',' << r.n << ',' << r.d << ',' << r.k << ',' << fmt(s.mse_mean) << ','
       << fmt(s.mse_std) << ',' << s.trials << ',' << fmt(r.realized_R) << ',' << fmt(s.beta_bar) << '\n';
  }
}

inline constexpr const char* kMseHeader = "scheme,R,n,d,k,mse_mean,mse_std,trials,realized_R,beta_bar\n";

inline int run_mse(const RunConfig& c) {
  ExperimentConfig ec;
  ec.schemes = c.schemes;
  ec.n = c.n;
  ec.d = c.d;
  ec.k = c.k;
  ec.correlation_R = c.R;
  ec.trials = c.trials;
  ec.master_seed = c.seed;
  ec.beta_trials = c.beta_trials;
  ec.workers = c.workers;
  const auto cv = experiment_vectors(ec);
  const auto path = BetaCache::default_path();
  BetaCache cache = BetaCache::load(path);
  bool dirty = false;
  BetaTable betas;
  for (const auto& spec : experiment_estimators(ec, cv.realized_R))
    if (spec.needs_beta()) betas[spec.name()] = cached_beta(cache, spec, c, c.n, c.d, c.k, dirty);
  if (dirty) cache.save(path);
  const auto report = run_mse_experiment(ec, betas);
  Output out(c.output);
  out.csv() << kMseHeader;
  write_mse_rows(out.csv(), report, c.R);
  for (const auto& s : report.schemes) {
    out.summary() << s.scheme << ": mse " << fmt(s.mse_mean) << " +- "
                  << fmt(s.mse_std / std::sqrt(static_cast<double>(s.trials))) << " (realized R "
                  << fmt(report.realized_R) << ")\n";
  }
  return kExitOk;
}

inline int run_rank(const RunConfig& c) {
  const auto report = run_rank_experiment(c.n, c.d, c.k, c.trials, c.seed, c.workers);
  Output out(c.output);
  out.csv() << "n,d,k,rank,count,fraction\n";
  for (std::size_t r = 0; r < report.histogram.size(); ++r) {
    if (report.histogram[r] == 0) continue;
    out.csv() << c.n << ',' << c.d << ',' << c.k << ',' << r << ',' << report.histogram[r] << ','
              << fmt(static_cast<double>(report.histogram[r]) / static_cast<double>(report.trials)) << '\n';
  }
  out.summary() << "rank: delta = " << fmt(report.delta()) << " over " << report.trials << " trials (full rank "
                << report.full_rank() << ")\n";
  return kExitOk;
}

inline int run_limit(const RunConfig& c) {
  const auto report = run_limit_experiment(c.n, c.d, c.k, c.trials, c.seed, c.beta_trials, c.workers);
  Output out(c.output);
  out.csv() << kMseHeader;
  write_mse_rows(out.csv(), report.mse, 0.0);
  out.summary() << "limit: mse(rand_k_spatial_max) / mse(rand_k) = " << fmt(report.ratio) << "\n";
  return kExitOk;
}

inline Dataset task_dataset(const RunConfig& c) {
  if (!c.dataset.empty()) {
    const std::filesystem::path p(c.dataset);
    const auto ext = p.extension().string();
    if (ext == ".csv" || ext == ".tsv" || ext == ".txt") {
      std::ifstream in(p);
      std::string header;
      std::getline(in, header);
      const std::size_t cols = split_line(header, c.separator[0]).size();
      ColumnRef target = cols ? cols - 1 : 0;
      if (!c.target.empty()) {
        if (c.target.find_first_not_of("0123456789") == std::string::npos) {
          target = static_cast<std::size_t>(std::stoull(c.target));
        } else {
          target = c.target;
        }
      }
      const std::size_t features = c.features ? c.features : (cols ? cols - 1 : 0);
      return load_csv_regression(p, features, target, c.separator[0]);
    }
    Dataset ds = load_idx_images(p, c.resize);
    if (!c.labels.empty()) {
      ds.labels = load_idx_labels(c.labels);
      ds.label_kind = LabelKind::Class;
      ds.validate();
    }
    return ds;
  }
  std::string kind = c.synthetic;
  if (kind.empty()) kind = c.command == "power" ? "spiked_covariance" : c.command == "kmeans" ? "blobs" : "linear";
  SyntheticParams p;
  p.m = c.samples;
  p.d = c.d;
  p.num_centers = c.clusters;
  p.center_scale = 1.0;
  p.noise = kind == "linear" ? 0.1 : 1.0;
  return gen_synthetic(parse_synthetic_kind(kind), p, c.seed).data;
}

inline int run_task(const RunConfig& c) {
  const Dataset ds = task_dataset(c);
  const std::size_t d = ds.dim();
  if (c.k > d) throw ParameterError("--k exceeds the data dimension " + std::to_string(d));
  if (c.n > ds.size()) throw ParameterError("--n exceeds the sample count " + std::to_string(ds.size()));
  std::vector<EstimatorSpec> specs;
  for (const auto& s : c.schemes) {
    specs.push_back(make_estimator(s, c.n, c.R));
    if ((specs.back().encoding() == Encoding::Srht || specs.back().encoding() == Encoding::NaiveRotation) &&
        !is_power_of_two(d)) {
      throw ParameterError("scheme " + s + " needs a power-of-2 dimension, data has " + std::to_string(d));
    }
  }

  std::vector<double> betas(specs.size(), 1.0);
  if (c.warmup == 0) {
    const auto path = BetaCache::default_path();
    BetaCache cache = BetaCache::load(path);
    bool dirty = false;
    for (std::size_t s = 0; s < specs.size(); ++s)
      if (specs[s].needs_beta()) betas[s] = cached_beta(cache, specs[s], c, c.n, d, c.k, dirty);
    if (dirty) cache.save(path);
  }

  auto partition_for = [&](std::size_t rep) {
    const std::uint64_t split_seed = c.seed + rep;
    return c.split == "iid" ? split_iid(ds, c.n, split_seed) : split_noniid(ds, c.n, split_seed);
  };
  if (!c.partition_out.empty()) write_partition(c.partition_out, partition_for(0));

  // histories[s][rep]
  std::vector<std::vector<TaskHistory>> histories(specs.size(), std::vector<TaskHistory>(c.repetitions));
  parallel_for(c.repetitions, c.workers, [&](std::size_t rep) {
    const auto partition = partition_for(rep);
    for (std::size_t s = 0; s < specs.size(); ++s) {
      TaskEstimator est{specs[s], c.k, betas[s], mix64(c.seed + rep), c.warmup};
      if (c.command == "power") {
        histories[s][rep] = run_power_iteration(ds, partition, est, c.rounds, c.seed + rep);
      } else if (c.command == "kmeans") {
        histories[s][rep] = run_kmeans(ds, partition, est, c.clusters, c.rounds, c.seed + rep);
      } else {
        histories[s][rep] = run_linreg(ds, partition, est, c.rounds, c.learning_rate);
      }
    }
  });

  Output out(c.output);
  out.csv() << "round,scheme,est_sq_error,task_loss\n";
  for (std::size_t s = 0; s < specs.size(); ++s) {
    std::size_t flagged = 0;
    bool diverged = false;
    for (const auto& h : histories[s])
      for (const auto& st : h) {
        flagged += st.empty_clusters + (st.normalization_failed ? 1 : 0);
        diverged = diverged || st.diverged;
      }
    for (std::size_t t = 0; t < c.rounds; ++t) {
      double err = 0.0, loss = 0.0;
      std::size_t count = 0;
      for (const auto& h : histories[s]) {
        if (t >= h.size()) continue;
        err += h[t].est_sq_error;
        loss += h[t].task_loss;
        ++count;
      }
      if (count == 0) break;
      out.csv() << t << ',' << specs[s].name() << ',' << fmt(err / count) << ',' << fmt(loss / count) << '\n';
    }
    double cum = 0.0, final_loss = 0.0;
    for (const auto& h : histories[s]) {
      cum += cumulative_est_error(h);
      final_loss += h.back().task_loss;
    }
    const double reps = static_cast<double>(c.repetitions);
    out.summary() << specs[s].name() << ": cumulative est error " << fmt(cum / reps) << ", final loss "
                  << fmt(final_loss / reps);
    if (flagged) out.summary() << ", " << flagged << " flagged client messages";
    if (diverged) out.summary() << ", diverged";
    out.summary() << '\n';
  }
  return kExitOk;
}

}  // namespace detail

inline int execute(const RunConfig& c) {
  if (c.command == "calibrate") return detail::run_calibrate(c);
  if (c.command == "mse") return detail::run_mse(c);
  if (c.command == "rank") return detail::run_rank(c);
  if (c.command == "limit") return detail::run_limit(c);
  if (is_task(c.command)) return detail::run_task(c);
  throw UsageError("unknown command " + c.command);
}

/// Full entry point with the 0 / 1 / 2 exit contract.
inline int run(int argc, const char* const* argv) {
  if (argc <= 1) {
    std::cerr << usage_text();
    return kExitUsage;
  }
  RunConfig config;
  try {
    config = parse_config(argc, argv);
  } catch (const CLI::CallForHelp&) {
    CLI::App app{"Distributed mean estimation simulator", "dme_sim"};
    RunConfig tmp;
    detail::build_app(app, tmp);
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n' << usage_text();
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n' << usage_text();
    return kExitUsage;
  }
  try {
    return execute(config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace dme::cli
