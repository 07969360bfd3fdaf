#include "topicstream/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "topicstream/error.hpp"

namespace topicstream {

std::optional<PriorMode> ParsePriorMode(std::string_view name) {
  if (name == "iedl") return PriorMode::kIedl;
  if (name == "idea_like") return PriorMode::kIdeaLike;
  if (name == "olda") return PriorMode::kOlda;
  return std::nullopt;
}

std::string_view PriorModeName(PriorMode mode) {
  switch (mode) {
    case PriorMode::kIedl:
      return "iedl";
    case PriorMode::kIdeaLike:
      return "idea_like";
    case PriorMode::kOlda:
      return "olda";
  }
  return "iedl";
}

void WindowBuffer::Push(RealMatrix phi) {
  phis.push_front(std::move(phi));
  while (phis.size() > capacity) phis.pop_back();
}

std::vector<double> DecayWeights(double lambda, int w) {
  if (w < 1) throw ValidationError("decay_weights: window must be >= 1");
  if (!(lambda >= 0.0)) throw ValidationError("decay_weights: lambda must be >= 0");
  std::vector<double> mu(static_cast<std::size_t>(w));
  for (int i = 1; i <= w; ++i) mu[i - 1] = std::exp(-lambda * i);
  return mu;
}

std::vector<double> SimilarityWeights(const WindowBuffer& window,
                                      std::size_t topic, bool literal_form) {
  if (window.phis.empty()) {
    throw ValidationError("similarity_weights: empty window");
  }
  const auto prior = window.prev_prior.row(topic);
  std::vector<double> s(window.phis.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto row = window.phis[i].row(topic);
    if (row.size() != prior.size()) {
      throw ValidationError("similarity_weights: dimension mismatch");
    }
    double dot = 0.0;
    for (std::size_t w = 0; w < row.size(); ++w) dot += row[w] * prior[w];
    s[i] = dot;
  }
  std::vector<double> gamma(s.size());
  if (literal_form) {
    double denom = 0.0;
    for (double x : s) denom += x;
    for (std::size_t i = 0; i < s.size(); ++i) gamma[i] = std::exp(s[i]) / denom;
    return gamma;
  }
  const double max_s = *std::max_element(s.begin(), s.end());
  double denom = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    gamma[i] = std::exp(s[i] - max_s);
    denom += gamma[i];
  }
  for (double& g : gamma) g /= denom;
  return gamma;
}

void RescaleWithFloor(std::span<double> row, double target, double floor) {
  const std::size_t n = row.size();
  if (n == 0) return;
  if (target < floor * static_cast<double>(n)) {
    throw ValidationError("prior rescale: base_beta below epsilon_floor");
  }
  std::vector<bool> pinned(n, false);
  std::vector<double> raw(row.begin(), row.end());
  for (;;) {
    double free_mass = 0.0;
    std::size_t n_pinned = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pinned[i]) {
        ++n_pinned;
      } else {
        free_mass += raw[i];
      }
    }
    const double remaining = target - floor * static_cast<double>(n_pinned);
    if (n_pinned == n) {
      for (double& x : row) x = floor;
      return;
    }
    if (free_mass <= 0.0) {
      // Nothing to scale: spread the remaining mass evenly over free entries.
      const double each = remaining / static_cast<double>(n - n_pinned);
      for (std::size_t i = 0; i < n; ++i) row[i] = pinned[i] ? floor : each;
      return;
    }
    const double scale = remaining / free_mass;
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (pinned[i]) {
        row[i] = floor;
        continue;
      }
      row[i] = raw[i] * scale;
      if (row[i] < floor) {
        pinned[i] = true;
        changed = true;
      }
    }
    if (!changed) return;
  }
}

RealMatrix CombinePrior(const WindowBuffer& window, const DecayParams& params,
                        double base_beta, double epsilon_floor,
                        bool literal_softmax) {
  if (window.phis.empty()) {
    throw ValidationError("combine_prior: empty window; use the cold-start prior");
  }
  const std::size_t used =
      std::min<std::size_t>(window.phis.size(), params.EffectiveWindow());
  const std::size_t k_topics = window.phis.front().rows();
  const std::size_t vocab = window.phis.front().cols();
  const auto mu = DecayWeights(params.EffectiveLambda(), static_cast<int>(used));

  WindowBuffer active;
  active.prev_prior = window.prev_prior;
  active.phis.assign(window.phis.begin(), window.phis.begin() + used);

  RealMatrix beta(k_topics, vocab, 0.0);
  for (std::size_t k = 0; k < k_topics; ++k) {
    std::vector<double> gamma;
    if (params.mode == PriorMode::kOlda) {
      gamma.assign(used, 1.0);
    } else {
      gamma = SimilarityWeights(active, k, literal_softmax);
    }
    auto out = beta.row(k);
    for (std::size_t i = 0; i < used; ++i) {
      const double weight = mu[i] * gamma[i];
      const auto phi = active.phis[i].row(k);
      for (std::size_t w = 0; w < vocab; ++w) out[w] += weight * phi[w];
    }
    RescaleWithFloor(out, base_beta * static_cast<double>(vocab), epsilon_floor);
  }
  return beta;
}

std::vector<SliceResult> RunStream(const StreamInput& input,
                                   const StreamConfig& config,
                                   const LabelContext* labels) {
  if (config.topics < 2) throw ValidationError("run_stream: K must be >= 2");
  if (config.decay.window_w < 1) {
    throw ValidationError("run_stream: window_w must be >= 1");
  }
  if (input.period_labels.size() != input.slice_docs.size()) {
    throw ValidationError("run_stream: one period label per slice required");
  }
  const std::size_t k_topics = config.topics;
  const std::size_t vocab = input.vocab_size;
  const RealMatrix cold_prior(k_topics, vocab, config.base_beta);

  WindowBuffer window;
  window.capacity = static_cast<std::size_t>(config.decay.EffectiveWindow());

  std::vector<SliceResult> results;
  results.reserve(input.slice_docs.size());
  for (std::size_t t = 0; t < input.slice_docs.size(); ++t) {
    SliceResult r;
    r.t = t;
    r.period_label = input.period_labels[t];
    r.doc_indices = input.slice_docs[t];
    r.divergences.assign(k_topics, 0.0);
    r.threshold = std::numeric_limits<double>::infinity();

    std::vector<ProcessedDoc> docs;
    docs.reserve(r.doc_indices.size());
    std::size_t tokens = 0;
    for (std::size_t idx : r.doc_indices) {
      docs.push_back(input.docs[idx]);
      tokens += input.docs[idx].length();
    }

    if (tokens == 0) {
      r.carried = true;
      if (window.empty()) {
        r.prior_used = cold_prior;
        r.phi = RealMatrix(k_topics, vocab, 1.0 / static_cast<double>(vocab));
      } else {
        r.prior_used = window.prev_prior;
        r.phi = window.phis.front();
        window.Push(r.phi);
      }
      r.theta = RealMatrix(docs.size(), k_topics, 1.0 / static_cast<double>(k_topics));
    } else {
      const bool cold = window.empty();
      r.prior_used = cold ? cold_prior
                          : CombinePrior(window, config.decay, config.base_beta,
                                         config.epsilon_floor,
                                         config.softmax_compat);
      PriorSpec priors{config.alpha, r.prior_used};
      priors.Validate(std::min(config.epsilon_floor, config.base_beta));
      r.seed = DeriveSeed(config.seed, t);
      r.sweeps = config.n_sweeps;
      auto trained = Train(docs, priors,
                           {config.n_sweeps, config.burn_in, config.sample_lag, r.seed});
      r.phi = std::move(trained.phi);
      r.theta = std::move(trained.theta);
      if (!cold) {
        auto report = Detect(r.phi, window.phis.front(), config.outlier, t);
        r.evaluated = true;
        r.divergences = std::move(report.js);
        r.threshold = report.threshold;
        r.anomaly_topics = std::move(report.anomalies);
      }
      window.Push(r.phi);
      window.prev_prior = r.prior_used;
    }
    if (labels != nullptr) {
      r.labels = LabelSlice(r.phi, r.theta, r.doc_indices, *labels);
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace topicstream
