#pragma once

// Collapsed Gibbs sampler for LDA over one time slice, with an asymmetric
// K x V topic-word prior so that a chained prior can be injected per slice.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "json.hpp"
#include "topicstream/matrix.hpp"
#include "topicstream/preprocess.hpp"
#include "topicstream/random.hpp"

namespace topicstream {

// Row k is the distribution of topic k over the vocabulary.
using TopicWordDist = RealMatrix;
// Row d is the topic mixture of document d.
using DocTopicDist = RealMatrix;

struct PriorSpec {
  double alpha = 0.1;
  RealMatrix beta;  // K x V, strictly positive

  static PriorSpec Symmetric(std::size_t topics, std::size_t vocab_size,
                             double alpha, double beta);

  std::size_t topics() const { return beta.rows(); }
  std::size_t vocab_size() const { return beta.cols(); }

  // Throws Error(kValidation) on negative alpha or any beta below floor.
  void Validate(double epsilon_floor) const;
};

struct TopicModelState {
  std::vector<std::vector<int>> z;  // per document, per position
  CountMatrix n_dk;                 // D x K
  CountMatrix n_kw;                 // K x V
  std::vector<long long> n_k;       // K
  std::uint64_t seed = 0;
  Rng rng;
  int sweeps = 0;
};

// Uniform random assignment from the seeded generator. Throws
// Error(kValidation) for K < 2, an empty corpus, or a token id >= V.
TopicModelState InitState(std::span<const ProcessedDoc> docs,
                          const PriorSpec& priors, std::uint64_t seed);

// One full pass over every token position.
void GibbsSweep(TopicModelState& state, std::span<const ProcessedDoc> docs,
                const PriorSpec& priors);

// Throws Error(kInvariant) if the count matrices disagree with z.
void CheckCounts(const TopicModelState& state,
                 std::span<const ProcessedDoc> docs);

// (n_kw + beta_kw) / (n_k + sum_w beta_kw)
TopicWordDist EstimatePhi(const TopicModelState& state,
                          const PriorSpec& priors);
// (n_dk + alpha) / (len_d + K alpha); an empty document with alpha = 0 is
// returned uniform.
DocTopicDist EstimateTheta(const TopicModelState& state, double alpha);

struct TrainOptions {
  int n_sweeps = 500;
  int burn_in = 300;
  int sample_lag = 20;
  std::uint64_t seed = 1;
};

struct TrainResult {
  TopicWordDist phi;
  DocTopicDist theta;
  int samples = 0;
};

// Init followed by n_sweeps sweeps. Estimates are averaged over the sweeps
// burn_in+1, burn_in+1+lag, ... so at least one sample is always taken.
TrainResult Train(std::span<const ProcessedDoc> docs, const PriorSpec& priors,
                  const TrainOptions& options);

struct ModelCheckpoint {
  std::size_t topics = 0;
  std::size_t vocab_size = 0;
  TopicWordDist phi;
  DocTopicDist theta;
  PriorSpec priors;
  std::uint64_t seed = 0;
  int sweeps = 0;
};

nlohmann::json CheckpointToJson(const ModelCheckpoint& checkpoint);
// Throws Error(kValidation) on a malformed or incompatible container.
ModelCheckpoint CheckpointFromJson(const nlohmann::json& j);
void SaveCheckpoint(const std::filesystem::path& path,
                    const ModelCheckpoint& checkpoint);
ModelCheckpoint LoadCheckpoint(const std::filesystem::path& path);

nlohmann::json MatrixToJson(const RealMatrix& m);
RealMatrix MatrixFromJson(const nlohmann::json& j);

}  // namespace topicstream
