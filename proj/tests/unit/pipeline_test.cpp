#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "topicstream/error.hpp"
#include "topicstream/pipeline.hpp"

#ifndef TOPICSTREAM_SOURCE_DIR
#define TOPICSTREAM_SOURCE_DIR "."
#endif

using namespace topicstream;
namespace fs = std::filesystem;

namespace {

const fs::path kData = fs::path(TOPICSTREAM_SOURCE_DIR) / "data";

RunConfig Example() {
  auto c = LoadConfig(kData / "example.toml");
  c.n_sweeps = 60;
  c.burn_in = 30;
  c.sample_lag = 10;
  return c;
}

const PipelineRun& ExampleRun() {
  static const PipelineRun run = RunPipeline(Example());
  return run;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path TempDir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("topicstream_pipeline_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("ingest the sample corpus") {
  auto c = Example();
  const auto summary = Ingest(c);
  CHECK(summary.loaded == 30);
  CHECK(summary.record_errors == 0);
  CHECK(summary.excluded == 0);
  REQUIRE(summary.slices.size() == 3);
  CHECK(summary.slices[0].period_label == "2017-01");

  c.start.clear();
  c.end.clear();
  CHECK(Ingest(c).slices.size() == 3);
  c.start = "2017-02";
  c.end = "2017-02";
  const auto narrow = Ingest(c);
  CHECK(narrow.slices.size() == 1);
  CHECK(narrow.excluded + narrow.slices[0].post_ids.size() == 30);
}

TEST_CASE("pipeline produces one result per slice") {
  const auto& run = ExampleRun();
  const auto& s = run.state;
  REQUIRE(s.results.size() == 3);
  CHECK(s.docs.size() == 30);
  CHECK(s.quality.size() == s.docs.size());
  for (double q : s.quality) {
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
  }
  CHECK(s.vocab.Find("word_embedding"));
  CHECK_FALSE(s.results[0].evaluated);
  CHECK(s.results[1].evaluated);
  for (const auto& r : s.results) {
    CHECK(r.labels.size() == s.config.K);
    CHECK(r.phi.rows() == s.config.K);
    CHECK(r.phi.cols() == s.vocab.size());
  }
  CHECK(run.coherence.count == 3 * s.config.K);
  CHECK(SliceSummaryLine(s.results[0]).rfind("slice 0 2017-01 docs=", 0) == 0);
}

TEST_CASE("evolution log and label report") {
  const auto& results = ExampleRun().state.results;
  const auto log = EvolutionLogJson(results);
  REQUIRE(log.size() == 3);
  CHECK(log[0]["threshold"].is_null());
  CHECK(log[0]["evaluated"] == false);
  CHECK(log[1]["divergences"].size() == 5);
  for (const auto& e : log) {
    CHECK(e.contains("prior_checksum"));
    CHECK(e.contains("phi_checksum"));
  }
  const auto labels = LabelReportJson(results);
  REQUIRE(labels.size() == 3);
  REQUIRE(labels[0]["topics"].size() == 5);
  const auto& topic = labels[0]["topics"][0];
  CHECK(topic.contains("phrases"));
  CHECK(topic.contains("posts"));
  CHECK(topic["coherence"].is_number());
}

TEST_CASE("run outputs are written and reproducible") {
  const auto& state = ExampleRun().state;
  const auto a = TempDir("a");
  const auto b = TempDir("b");
  WriteRunOutputs(state, a);
  WriteRunOutputs(RunPipeline(Example()).state, b);
  for (const char* name : {"evolution.json", "labels.json", "river.json", "river.html",
                           "features.csv", "vocab.tsv", "config.toml", "run_state.json"}) {
    CAPTURE(name);
    REQUIRE(fs::exists(a / name));
    CHECK(Slurp(a / name) == Slurp(b / name));
  }
  // The echoed config reloads to the same hash.
  CHECK(ParseConfig(Slurp(a / "config.toml")).Hash() == state.config.Hash());
}

TEST_CASE("run state round trip") {
  const auto& state = ExampleRun().state;
  const auto dir = TempDir("state");
  WriteRunOutputs(state, dir);
  const auto back = LoadRunState(dir);
  CHECK(back.config.Canonical() == state.config.Canonical());
  CHECK(back.vocab.id_to_token == state.vocab.id_to_token);
  CHECK(back.vocab.is_phrase == state.vocab.is_phrase);
  CHECK(back.quality == state.quality);
  REQUIRE(back.results.size() == state.results.size());
  for (std::size_t t = 0; t < back.results.size(); ++t) {
    CHECK(back.results[t].phi == state.results[t].phi);
    CHECK(back.results[t].prior_used == state.results[t].prior_used);
    CHECK(back.results[t].anomaly_topics == state.results[t].anomaly_topics);
  }
  CHECK(RunStateToJson(back) == RunStateToJson(state));

  auto j = RunStateToJson(state);
  j["format"] = "something-else";
  CHECK_THROWS_AS(RunStateFromJson(j), Error);
  CHECK_THROWS_AS(LoadRunState(TempDir("empty")), Error);
}

TEST_CASE("errors name their stage") {
  auto c = Example();
  c.window_w = 0;
  CHECK_THROWS_WITH(RunPipeline(c), doctest::Contains("config: window_w"));
  c = Example();
  c.input = (kData / "missing.jsonl").string();
  try {
    RunPipeline(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
    CHECK(std::string(e.what()).rfind("ingest:", 0) == 0);
  }
  c = Example();
  c.start = "2030-01";
  c.end = "2030-02";
  CHECK_THROWS_AS(RunPipeline(c), Error);
}

TEST_CASE("run directories are unique") {
  auto c = Example();
  c.output_dir = TempDir("runs").string();
  const auto first = MakeRunDirectory(c);
  const auto second = MakeRunDirectory(c);
  CHECK(fs::is_directory(first));
  CHECK(fs::is_directory(second));
  CHECK(first != second);
  CHECK(first.filename().string().rfind(c.Hash() + "-", 0) == 0);
}
