#pragma once

// Run configuration: a flat key = value file (TOML subset) plus command-line
// overrides of the same form. Unknown keys are rejected.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "topicstream/anomaly.hpp"
#include "topicstream/tracker.hpp"

namespace topicstream {

struct RunConfig {
  std::size_t K = 20;
  std::optional<double> alpha;  // unset: 50 / K
  double base_beta = 0.01;
  double epsilon_floor = 1e-8;
  int n_sweeps = 500;
  int burn_in = 300;
  int sample_lag = 20;
  std::uint64_t seed = 1;
  int window_w = 3;
  double lambda = 0.5;
  PriorMode mode = PriorMode::kIedl;
  double pmi_threshold = 1.0;
  int min_count = 5;
  int min_document_frequency = 2;
  std::size_t top_n = 10;
  std::size_t top_m = 3;
  std::size_t coherence_N = 10;
  double eta = 0.1;
  OutlierMethod outlier_method = OutlierMethod::kBoxplot;
  bool softmax_compat = false;
  std::string granularity = "month";
  std::string start;  // "YYYY-MM"; empty: earliest post
  std::string end;    // "YYYY-MM"; empty: latest post
  std::string input;
  std::string input_format = "jsonl";
  std::string stopwords;  // empty: bundled list
  std::string output_dir = "runs";

  double Alpha() const { return alpha ? *alpha : 50.0 / static_cast<double>(K); }

  // Throws Error(kValidation) naming the key on unknown keys or bad values.
  void Set(std::string_view key, std::string_view value);
  // Cross-field checks; the message names the offending key.
  void Validate() const;

  // Sorted "key = value" lines; identical configs serialize identically.
  std::string Canonical() const;
  // 16 hex digits of the canonical form.
  std::string Hash() const;
  nlohmann::json ToJson() const;

  StreamConfig ToStream() const;
  LabelOptions ToLabels() const;
};

std::vector<std::string> ConfigKeys();

// Parses key = value lines; "#" starts a comment, strings may be quoted.
RunConfig ParseConfig(std::string_view text, RunConfig base = {});
RunConfig LoadConfig(const std::filesystem::path& path);
// "key=value".
void ApplyOverride(RunConfig& config, std::string_view assignment);

}  // namespace topicstream
