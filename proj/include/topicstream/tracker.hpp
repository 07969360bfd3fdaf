#pragma once

// Slice-by-slice training with a chained topic-word prior. The prior for
// slice t mixes the topic-word matrices of the last w slices, weighting
// slice t-i by an exponential decay exp(-lambda i) and, per topic, by a
// softmax over its similarity to the previous prior.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "topicstream/anomaly.hpp"
#include "topicstream/labeling.hpp"
#include "topicstream/lda.hpp"

namespace topicstream {

enum class PriorMode {
  kIedl,      // decay and similarity over the window
  kIdeaLike,  // similarity only (lambda forced to 0)
  kOlda,      // previous slice only, unit weights
};

std::optional<PriorMode> ParsePriorMode(std::string_view name);
std::string_view PriorModeName(PriorMode mode);

struct DecayParams {
  int window_w = 3;
  double lambda = 0.5;
  PriorMode mode = PriorMode::kIedl;

  // Window length and decay actually applied for the mode.
  int EffectiveWindow() const { return mode == PriorMode::kOlda ? 1 : window_w; }
  double EffectiveLambda() const {
    return mode == PriorMode::kIedl ? lambda : 0.0;
  }
};

struct WindowBuffer {
  std::deque<RealMatrix> phis;  // most recent first
  RealMatrix prev_prior;        // prior fed to the previous trained slice
  std::size_t capacity = 1;

  bool empty() const { return phis.empty(); }
  void Push(RealMatrix phi);
};

// mu_i = exp(-lambda i), i = 1..w.
std::vector<double> DecayWeights(double lambda, int w);

// gamma_i for one topic: softmax over s_i = phi^{t-i}_k . beta^{t-1}_k. With
// `literal_form` the denominator sums the raw dot products instead of their
// exponentials, and the weights no longer sum to one.
std::vector<double> SimilarityWeights(const WindowBuffer& window,
                                      std::size_t topic,
                                      bool literal_form = false);

// Scales a nonnegative row to sum to `target` with every entry >= floor.
// Entries that would fall below the floor are pinned to it and the remaining
// mass is redistributed proportionally. Requires target >= floor * size.
void RescaleWithFloor(std::span<double> row, double target, double floor);

// Weighted sum of the window's rows, rescaled to base_beta * V per topic and
// floored at epsilon_floor. Throws Error(kValidation) on an empty window.
RealMatrix CombinePrior(const WindowBuffer& window, const DecayParams& params,
                        double base_beta, double epsilon_floor,
                        bool literal_softmax = false);

struct StreamConfig {
  std::size_t topics = 20;
  double alpha = 2.5;  // 50 / K at the default K
  double base_beta = 0.01;
  double epsilon_floor = 1e-8;
  int n_sweeps = 500;
  int burn_in = 300;
  int sample_lag = 20;
  std::uint64_t seed = 1;
  DecayParams decay;
  bool softmax_compat = false;
  OutlierMethod outlier = OutlierMethod::kBoxplot;
};

struct SliceResult {
  std::size_t t = 0;
  std::string period_label;
  // Empty slice: topic-word matrix carried forward, nothing trained.
  bool carried = false;
  // Divergences computed against a predecessor.
  bool evaluated = false;
  std::vector<std::size_t> doc_indices;  // into the global document list
  TopicWordDist phi;
  DocTopicDist theta;  // rows follow doc_indices
  RealMatrix prior_used;
  std::uint64_t seed = 0;
  int sweeps = 0;
  std::vector<double> divergences;
  double threshold = 0.0;
  std::vector<int> anomaly_topics;
  std::vector<TopicLabelBundle> labels;
};

struct StreamInput {
  std::span<const ProcessedDoc> docs;  // global document list
  std::vector<std::vector<std::size_t>> slice_docs;
  std::vector<std::string> period_labels;
  std::size_t vocab_size = 0;
};

// Runs every slice in order. Labels are attached when `labels` is non-null.
std::vector<SliceResult> RunStream(const StreamInput& input,
                                   const StreamConfig& config,
                                   const LabelContext* labels = nullptr);

}  // namespace topicstream
