#pragma once

// Stream-graph (ThemeRiver) data, a static HTML rendering of it, and the
// document-topic feature matrix.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "topicstream/preprocess.hpp"
#include "topicstream/tracker.hpp"

namespace topicstream {

struct LabelContribution {
  std::string phrase;
  long long count = 0;              // occurrences of the phrase in the slice
  double best_post_quality = 0.0;   // quality of the post behind the label
};

// sum_a ln(count_a) * quality_a, floored at 0. Labels with count < 1 add
// nothing.
double BranchWidth(std::span<const LabelContribution> labels);

// Per-label contributions for one topic of one slice: occurrences of each
// ranked phrase in the slice's documents, and the quality of the post that
// contains it with the highest theta * quality (ties by post id).
std::vector<LabelContribution> SliceLabelContributions(
    const SliceResult& result, std::size_t topic,
    std::span<const ProcessedDoc> docs, std::span<const double> quality);

struct RiverTopic {
  int k = 0;
  std::string label;
  std::vector<double> widths;
  std::vector<bool> emerging;
};

struct RiverSeries {
  std::vector<std::string> slices;
  std::vector<RiverTopic> topics;
};

RiverSeries BuildRiver(const std::vector<SliceResult>& results,
                       std::span<const ProcessedDoc> docs,
                       std::span<const double> quality, const Vocabulary& vocab);

nlohmann::json RiverToJson(const RiverSeries& river);

// Stacked stream layout with a wiggle-minimizing baseline. Returns, per
// topic and slice, the lower and upper edge of the band.
struct StreamLayout {
  std::vector<std::vector<double>> lower;
  std::vector<std::vector<double>> upper;
};
StreamLayout WiggleLayout(const RiverSeries& river);

// Self-contained page: inline SVG and CSS, no scripts or external resources.
std::string RenderRiverHtml(const RiverSeries& river);

// Writes `json_path` and, next to it, the same name with an .html extension.
// Throws Error(kIo) when either file cannot be written.
void ExportRiver(const RiverSeries& river, const std::filesystem::path& json_path);

struct FeatureRow {
  std::string post_id;
  std::size_t slice = 0;
  std::vector<double> theta;
};

std::vector<FeatureRow> CollectFeatures(const std::vector<SliceResult>& results,
                                        std::span<const ProcessedDoc> docs);
// Header post_id,slice,theta_0..theta_{K-1}; LF line endings.
void WriteFeaturesCsv(std::ostream& out, const std::vector<FeatureRow>& rows,
                      std::size_t topics);
void ExportFeatures(const std::vector<SliceResult>& results,
                    std::span<const ProcessedDoc> docs,
                    const std::filesystem::path& path);
// Reads the CSV written above. Throws Error(kValidation) on malformed input.
std::vector<FeatureRow> ReadFeaturesCsv(std::istream& in);

}  // namespace topicstream
