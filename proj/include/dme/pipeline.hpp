#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dme/estimators.hpp"

namespace dme {

/// One round of distributed mean estimation: client i encodes with seed
/// (master_seed, i, round_index) and the server decodes. Different schemes run
/// through the same pipeline see the same seeds, which pairs their errors.
/// The SRHT factorization is computed at most once and shared by all
/// Rand-Proj-Spatial transforms.
class RoundPipeline {
 public:
  RoundPipeline(std::size_t n, std::size_t d, std::size_t k, std::uint64_t master_seed, std::uint64_t round_index)
      : n_(n), d_(d), k_(k), master_seed_(master_seed), round_index_(round_index) {}

  SketchSeed seed(std::size_t client) const { return {master_seed_, client, round_index_}; }

  DecoderConfig decoder_config(const EstimatorSpec& spec, double beta_bar) const {
    return {n_, d_, k_, spec.transform, beta_bar, -1.0};
  }

  DenseVector run(const EstimatorSpec& spec, double beta_bar, std::span<const DenseVector> clients) {
    if (clients.size() != n_) throw ParameterError("RoundPipeline: expected n client vectors");
    const DecoderConfig config = decoder_config(spec, beta_bar);
    if (spec.method == Method::RandProjSpatial && !config.oversampled()) {
      const SrhtGramFactor& f = factor();
      std::vector<DenseVector> payloads;
      payloads.reserve(n_);
      for (std::size_t i = 0; i < n_; ++i) {
        detail::check_input(clients[i], k_);
        payloads.push_back(srht_apply(f.sketches()[i], clients[i]));
      }
      config.validate();
      return f.apply(payloads, spec.transform, beta_bar / static_cast<double>(n_));
    }
    std::vector<EncodedMessage> messages;
    messages.reserve(n_);
    for (std::size_t i = 0; i < n_; ++i) messages.push_back(encode(spec, clients[i], seed(i), k_));
    return decode(spec, messages, config);
  }

  const SrhtGramFactor& factor() {
    if (!factor_) {
      std::vector<Sketch> sketches;
      sketches.reserve(n_);
      for (std::size_t i = 0; i < n_; ++i) sketches.push_back(derive_sketch(seed(i), d_, k_));
      factor_.emplace(std::move(sketches));
    }
    return *factor_;
  }

 private:
  std::size_t n_;
  std::size_t d_;
  std::size_t k_;
  std::uint64_t master_seed_;
  std::uint64_t round_index_;
  std::optional<SrhtGramFactor> factor_;
};

}  // namespace dme
