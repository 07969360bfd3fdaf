#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "topicstream/config.hpp"
#include "topicstream/corpus.hpp"
#include "topicstream/error.hpp"
#include "topicstream/labeling.hpp"
#include "topicstream/pipeline.hpp"
#include "topicstream/synth.hpp"

namespace fs = std::filesystem;
using namespace topicstream;

namespace {

int CmdIngest(const RunConfig& config, const std::string& out_path) {
  std::vector<Post> posts;
  const auto summary = Ingest(config, &posts);
  std::cout << "loaded " << summary.loaded << " posts, " << summary.record_errors
            << " record errors, " << summary.skipped << " skipped, "
            << summary.excluded << " outside range\n";
  for (const auto& s : summary.slices) {
    std::cout << "slice " << s.index << " " << s.period_label << " "
              << s.post_ids.size() << "\n";
  }
  if (!out_path.empty()) WritePostsJsonl(out_path, posts);
  return 0;
}

int CmdRun(const RunConfig& config, const std::string& run_dir, bool quiet) {
  const auto run = RunPipeline(config);
  const fs::path dir = run_dir.empty() ? MakeRunDirectory(config) : fs::path(run_dir);
  WriteRunOutputs(run.state, dir);
  if (!quiet) {
    std::cout << "posts " << run.ingest.loaded << ", record errors "
              << run.ingest.record_errors << ", vocabulary "
              << run.state.vocab.size() << "\n";
    for (const auto& r : run.state.results) std::cout << SliceSummaryLine(r) << "\n";
    std::cout << "coherence mean " << run.coherence.mean << " se "
              << run.coherence.standard_error << " over " << run.coherence.count
              << " topics\n";
  }
  std::cout << "run directory " << dir.string() << "\n";
  return 0;
}

int CmdSynth(const SynthParams& params, const std::string& out, std::string truth) {
  const auto corpus = GenerateSynthetic(params);
  WritePostsJsonl(out, corpus.posts);
  if (truth.empty()) truth = out + ".truth.json";
  std::ofstream t(truth, std::ios::binary);
  if (!t) throw IoError("cannot write '" + truth + "'");
  t << GroundTruthJson(corpus).dump(2) << "\n";
  if (!t) throw IoError("write failed for '" + truth + "'");
  std::cout << "wrote " << corpus.posts.size() << " posts to " << out
            << ", ground truth " << truth << "\n";
  return 0;
}

int CmdCoherence(const std::string& run_dir, std::size_t n) {
  const auto state = LoadRunState(run_dir);
  const CooccurrenceIndex index(state.docs, state.vocab.size());
  const auto summary = CoherenceReport(state.results, n, index);
  nlohmann::json out = {{"N", n},
                        {"mean", summary.mean},
                        {"standard_error", summary.standard_error},
                        {"topics", summary.count}};
  std::cout << out.dump() << "\n";
  return 0;
}

int CmdExport(const std::string& run_dir, std::string out_dir) {
  const auto state = LoadRunState(run_dir);
  if (out_dir.empty()) out_dir = run_dir;
  WriteRunOutputs(state, out_dir);
  std::cout << "exported " << state.results.size() << " slices to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online topic tracking with emerging-topic detection"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("-c,--config", config_path, "Config file (key = value lines)");
    cmd->add_option("-s,--set", overrides, "Override one key: key=value")
        ->allow_extra_args(false);
  };

  auto* ingest = app.add_subcommand("ingest", "Load and slice posts, report counts");
  add_config(ingest);
  std::string input, format, ingest_out;
  ingest->add_option("-i,--input", input, "Input file");
  ingest->add_option("-f,--format", format, "jsonl, csv or stackexchange_xml");
  ingest->add_option("-o,--out", ingest_out, "Write the kept posts as JSONL");

  auto* run = app.add_subcommand("run", "Run the full pipeline");
  add_config(run);
  std::string run_dir;
  bool quiet = false;
  run->add_option("--run-dir", run_dir, "Output directory (default: hashed name)");
  run->add_flag("-q,--quiet", quiet, "Only print the run directory");

  auto* synth = app.add_subcommand("synth", "Write a synthetic corpus and ground truth");
  SynthParams sp;
  std::string synth_out, truth_out, synth_start = "2017-01";
  synth->add_option("-o,--out", synth_out, "Output JSONL")->required();
  synth->add_option("--truth", truth_out, "Ground-truth file (default: <out>.truth.json)");
  synth->add_option("--topics", sp.topics, "True topic count");
  synth->add_option("--vocab", sp.vocab_size, "Vocabulary size");
  synth->add_option("--docs", sp.docs_per_slice, "Documents per slice");
  synth->add_option("--length", sp.doc_length, "Tokens per document");
  synth->add_option("--slices", sp.slices, "Number of slices");
  synth->add_option("--shift-slice", sp.shift_slice, "Slice of the topic replacement (-1: none)");
  synth->add_option("--shift-topic", sp.shift_topic, "Replaced topic");
  synth->add_option("--magnitude", sp.shift_magnitude, "Replacement strength in [0,1]");
  synth->add_option("--drift", sp.drift, "Per-slice drift scale");
  synth->add_option("--doc-alpha", sp.doc_alpha, "Document-topic concentration");
  synth->add_option("--leak", sp.leak, "Uniform background mass");
  synth->add_option("--seed", sp.seed, "Generator seed");
  synth->add_option("--start", synth_start, "First month (YYYY-MM)");

  auto* coherence = app.add_subcommand("coherence", "Re-score a saved run");
  std::string coh_dir;
  std::size_t coh_n = 10;
  coherence->add_option("--run-dir", coh_dir, "Run directory")->required();
  coherence->add_option("-N,--n", coh_n, "Top words per topic");

  auto* exporter = app.add_subcommand("export", "Re-emit outputs from a saved run");
  std::string exp_dir, exp_out;
  exporter->add_option("--run-dir", exp_dir, "Run directory")->required();
  exporter->add_option("-o,--out", exp_out, "Destination (default: the run directory)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    auto load_config = [&] {
      RunConfig config = config_path.empty() ? RunConfig{} : LoadConfig(config_path);
      for (const auto& o : overrides) ApplyOverride(config, o);
      return config;
    };
    if (*ingest) {
      auto config = load_config();
      if (!input.empty()) config.input = input;
      if (!format.empty()) config.input_format = format;
      config.Validate();
      return CmdIngest(config, ingest_out);
    }
    if (*run) return CmdRun(load_config(), run_dir, quiet);
    if (*synth) {
      const auto start = Period::Parse(synth_start);
      if (!start) throw ValidationError("start: expected YYYY-MM");
      sp.start = *start;
      return CmdSynth(sp, synth_out, truth_out);
    }
    if (*coherence) {
      if (coh_n < 2) throw ValidationError("N must be >= 2");
      return CmdCoherence(coh_dir, coh_n);
    }
    if (*exporter) return CmdExport(exp_dir, exp_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::kInvariant);
  }
  return 0;
}
