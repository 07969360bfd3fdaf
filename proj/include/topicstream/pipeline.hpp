#pragma once

// End-to-end run: ingest, slice, preprocess, stream training with labels,
// and the output files of a run directory.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "topicstream/config.hpp"
#include "topicstream/corpus.hpp"
#include "topicstream/labeling.hpp"
#include "topicstream/preprocess.hpp"
#include "topicstream/tracker.hpp"

namespace topicstream {

// What a finished run keeps; enough to rebuild every output file.
struct RunState {
  RunConfig config;
  Vocabulary vocab;
  std::vector<ProcessedDoc> docs;
  std::vector<double> quality;  // per doc
  std::vector<SliceResult> results;
};

struct IngestSummary {
  std::size_t loaded = 0;
  std::size_t record_errors = 0;
  std::size_t skipped = 0;
  std::size_t excluded = 0;
  std::vector<TimeSlice> slices;
};

struct PipelineRun {
  IngestSummary ingest;
  RunState state;
  CoherenceSummary coherence;
};

// Loads and slices the configured input. The month range defaults to the
// span of the loaded posts.
IngestSummary Ingest(const RunConfig& config, std::vector<Post>* kept = nullptr);

// Errors are rethrown with the failing stage prefixed to the message.
PipelineRun RunPipeline(const RunConfig& config);

// Evolution log: one record per slice.
nlohmann::json EvolutionLogJson(const std::vector<SliceResult>& results);
nlohmann::json LabelReportJson(const std::vector<SliceResult>& results);

nlohmann::json RunStateToJson(const RunState& state);
RunState RunStateFromJson(const nlohmann::json& j);
RunState LoadRunState(const std::filesystem::path& run_dir);

// Writes evolution.json, labels.json, river.json, river.html, features.csv,
// vocab.tsv, config.toml and run_state.json.
void WriteRunOutputs(const RunState& state, const std::filesystem::path& dir);

// <output_dir>/<config hash>-<UTC timestamp>, created on demand.
std::filesystem::path MakeRunDirectory(const RunConfig& config);

std::string SliceSummaryLine(const SliceResult& result);

}  // namespace topicstream
