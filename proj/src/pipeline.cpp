#include "topicstream/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <limits>
#include <unordered_map>

#include "topicstream/checksum.hpp"
#include "topicstream/error.hpp"
#include "topicstream/export.hpp"

namespace topicstream {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class F>
auto Stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string(name) + ": " + e.what());
  } catch (const json::exception& e) {
    throw ValidationError(std::string(name) + ": " + e.what());
  }
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

json ReadJson(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string MatrixChecksum(const RealMatrix& m) {
  return ChecksumDoubles(m.data());
}

json BundleToJson(const TopicLabelBundle& b) {
  json phrases = json::array();
  for (const auto& p : b.phrases) {
    phrases.push_back({{"id", p.id}, {"token", p.token}, {"weight", p.weight}});
  }
  json posts = json::array();
  for (const auto& p : b.posts) {
    posts.push_back({{"id", p.post_id}, {"doc", p.doc}, {"score", p.score}});
  }
  return {{"k", b.topic},
          {"phrases", std::move(phrases)},
          {"phrases_short", b.phrases_short},
          {"posts", std::move(posts)},
          {"coherence", b.coherence}};
}

TopicLabelBundle BundleFromJson(const json& j) {
  TopicLabelBundle b;
  b.topic = j.at("k").get<int>();
  for (const auto& p : j.at("phrases")) {
    b.phrases.push_back({p.at("id").get<int>(), p.at("token").get<std::string>(),
                         p.at("weight").get<double>()});
  }
  b.phrases_short = j.at("phrases_short").get<bool>();
  for (const auto& p : j.at("posts")) {
    b.posts.push_back({p.at("doc").get<std::size_t>(),
                       p.at("id").get<std::string>(), p.at("score").get<double>()});
  }
  b.coherence = j.at("coherence").get<double>();
  return b;
}

json ThresholdJson(double threshold) {
  return std::isfinite(threshold) ? json(threshold) : json(nullptr);
}

}  // namespace

IngestSummary Ingest(const RunConfig& config, std::vector<Post>* kept) {
  if (config.input.empty()) throw ValidationError("input: no input file configured");
  const auto format = ParsePostFormat(config.input_format);
  if (!format) throw ValidationError("input_format: unknown format");
  auto load = LoadPosts(config.input, *format);

  IngestSummary summary;
  summary.loaded = load.posts.size();
  summary.record_errors = load.errors.size();
  summary.skipped = load.skipped;

  std::optional<Period> start =
      config.start.empty() ? std::nullopt : Period::Parse(config.start);
  std::optional<Period> end =
      config.end.empty() ? std::nullopt : Period::Parse(config.end);
  if (!start || !end) {
    if (load.posts.empty()) throw ValidationError("input: no valid posts to slice");
    Period lo = Period::Of(load.posts.front().created_at);
    Period hi = lo;
    for (const auto& p : load.posts) {
      lo = std::min(lo, Period::Of(p.created_at));
      hi = std::max(hi, Period::Of(p.created_at));
    }
    if (!start) start = lo;
    if (!end) end = hi;
  }
  if (*end < *start) throw ValidationError("end must not precede start");
  auto sliced = SliceByPeriod(load.posts, Granularity::kMonth, *start, *end);
  summary.excluded = sliced.excluded;
  summary.slices = std::move(sliced.slices);

  if (kept != nullptr) {
    kept->clear();
    for (auto& p : load.posts) {
      const auto period = Period::Of(p.created_at);
      if (*start <= period && period <= *end) kept->push_back(std::move(p));
    }
  }
  return summary;
}

PipelineRun RunPipeline(const RunConfig& config) {
  Stage("config", [&] { config.Validate(); });

  PipelineRun run;
  run.state.config = config;
  std::vector<Post> posts;
  run.ingest = Stage("ingest", [&] { return Ingest(config, &posts); });
  if (posts.empty()) {
    throw ValidationError("ingest: no posts fall inside the configured period range");
  }

  auto pre = Stage("preprocess", [&] {
    const auto stopwords = config.stopwords.empty()
                               ? StopwordList::Default()
                               : StopwordList::Load(config.stopwords);
    const RuleLemmatizer lemmatizer;
    PreprocessOptions options;
    options.phrases.pmi_threshold = config.pmi_threshold;
    options.phrases.min_count = config.min_count;
    options.index.min_document_frequency = config.min_document_frequency;
    return Preprocess(posts, stopwords, lemmatizer, options);
  });
  auto& state = run.state;
  state.vocab = std::move(pre.corpus.vocab);
  state.docs = std::move(pre.corpus.docs);

  state.quality.resize(state.docs.size());
  for (std::size_t d = 0; d < state.docs.size(); ++d) {
    state.quality[d] =
        QualityScore(posts[d].votes, posts[d].views,
                     static_cast<std::int64_t>(state.docs[d].length()), config.eta);
  }

  std::unordered_map<std::string, std::size_t> doc_of;
  for (std::size_t d = 0; d < state.docs.size(); ++d) doc_of[state.docs[d].post_id] = d;
  StreamInput input;
  input.docs = state.docs;
  input.vocab_size = state.vocab.size();
  for (const auto& slice : run.ingest.slices) {
    std::vector<std::size_t> ids;
    for (const auto& id : slice.post_ids) ids.push_back(doc_of.at(id));
    input.slice_docs.push_back(std::move(ids));
    input.period_labels.push_back(slice.period_label);
  }

  const CooccurrenceIndex index(state.docs, state.vocab.size());
  LabelContext context;
  context.vocab = &state.vocab;
  context.cooccurrence = &index;
  context.docs = state.docs;
  context.quality = state.quality;
  context.options = config.ToLabels();

  state.results =
      Stage("model", [&] { return RunStream(input, config.ToStream(), &context); });
  run.coherence = Stage("labeling", [&] {
    return CoherenceReport(state.results, config.coherence_N, index);
  });
  return run;
}

json EvolutionLogJson(const std::vector<SliceResult>& results) {
  json log = json::array();
  for (const auto& r : results) {
    log.push_back({{"t", r.t},
                   {"period_label", r.period_label},
                   {"divergences", r.divergences},
                   {"anomaly_topics", r.anomaly_topics},
                   {"threshold", ThresholdJson(r.threshold)},
                   {"carried", r.carried},
                   {"evaluated", r.evaluated},
                   {"prior_checksum", MatrixChecksum(r.prior_used)},
                   {"phi_checksum", MatrixChecksum(r.phi)}});
  }
  return log;
}

json LabelReportJson(const std::vector<SliceResult>& results) {
  json report = json::array();
  for (const auto& r : results) {
    json topics = json::array();
    for (const auto& b : r.labels) {
      json phrases = json::array();
      for (const auto& p : b.phrases) {
        phrases.push_back({{"token", p.token}, {"weight", p.weight}});
      }
      json posts = json::array();
      for (const auto& p : b.posts) {
        posts.push_back({{"id", p.post_id}, {"score", p.score}});
      }
      topics.push_back({{"k", b.topic},
                        {"phrases", std::move(phrases)},
                        {"posts", std::move(posts)},
                        {"coherence", b.coherence}});
    }
    report.push_back({{"t", r.t},
                      {"period_label", r.period_label},
                      {"carried", r.carried},
                      {"topics", std::move(topics)}});
  }
  return report;
}

json RunStateToJson(const RunState& state) {
  json vocab = json::array();
  for (std::size_t i = 0; i < state.vocab.size(); ++i) {
    vocab.push_back({state.vocab.id_to_token[i], static_cast<bool>(state.vocab.is_phrase[i]),
                     state.vocab.document_frequency[i]});
  }
  json docs = json::array();
  for (const auto& d : state.docs) {
    docs.push_back({{"post_id", d.post_id}, {"tokens", d.token_ids}});
  }
  json results = json::array();
  for (const auto& r : state.results) {
    json labels = json::array();
    for (const auto& b : r.labels) labels.push_back(BundleToJson(b));
    results.push_back({{"t", r.t},
                       {"period_label", r.period_label},
                       {"carried", r.carried},
                       {"evaluated", r.evaluated},
                       {"doc_indices", r.doc_indices},
                       {"phi", MatrixToJson(r.phi)},
                       {"theta", MatrixToJson(r.theta)},
                       {"prior_used", MatrixToJson(r.prior_used)},
                       {"seed", r.seed},
                       {"sweeps", r.sweeps},
                       {"divergences", r.divergences},
                       {"threshold", ThresholdJson(r.threshold)},
                       {"anomaly_topics", r.anomaly_topics},
                       {"labels", std::move(labels)}});
  }
  return {{"format", "topicstream-run"},
          {"version", 1},
          {"config", state.config.Canonical()},
          {"vocab", std::move(vocab)},
          {"docs", std::move(docs)},
          {"quality", state.quality},
          {"results", std::move(results)}};
}

RunState RunStateFromJson(const json& j) {
  if (j.value("format", "") != "topicstream-run" || j.value("version", 0) != 1) {
    throw ValidationError("run state: unsupported container");
  }
  RunState state;
  state.config = ParseConfig(j.at("config").get<std::string>());
  for (const auto& v : j.at("vocab")) {
    const int id = state.vocab.Add(v.at(0).get<std::string>(), v.at(2).get<int>());
    state.vocab.is_phrase[static_cast<std::size_t>(id)] = v.at(1).get<bool>();
  }
  for (const auto& d : j.at("docs")) {
    state.docs.push_back(
        {d.at("post_id").get<std::string>(), d.at("tokens").get<std::vector<int>>()});
  }
  state.quality = j.at("quality").get<std::vector<double>>();
  if (state.quality.size() != state.docs.size()) {
    throw ValidationError("run state: quality and document counts differ");
  }
  for (const auto& rj : j.at("results")) {
    SliceResult r;
    r.t = rj.at("t").get<std::size_t>();
    r.period_label = rj.at("period_label").get<std::string>();
    r.carried = rj.at("carried").get<bool>();
    r.evaluated = rj.at("evaluated").get<bool>();
    r.doc_indices = rj.at("doc_indices").get<std::vector<std::size_t>>();
    for (auto d : r.doc_indices) {
      if (d >= state.docs.size()) throw ValidationError("run state: bad document index");
    }
    r.phi = MatrixFromJson(rj.at("phi"));
    r.theta = MatrixFromJson(rj.at("theta"));
    r.prior_used = MatrixFromJson(rj.at("prior_used"));
    r.seed = rj.at("seed").get<std::uint64_t>();
    r.sweeps = rj.at("sweeps").get<int>();
    r.divergences = rj.at("divergences").get<std::vector<double>>();
    const auto& th = rj.at("threshold");
    r.threshold = th.is_null() ? std::numeric_limits<double>::infinity()
                               : th.get<double>();
    r.anomaly_topics = rj.at("anomaly_topics").get<std::vector<int>>();
    for (const auto& b : rj.at("labels")) r.labels.push_back(BundleFromJson(b));
    state.results.push_back(std::move(r));
  }
  return state;
}

RunState LoadRunState(const fs::path& run_dir) {
  try {
    return RunStateFromJson(ReadJson(run_dir / "run_state.json"));
  } catch (const json::exception& e) {
    throw ValidationError("run state: " + std::string(e.what()));
  }
}

void WriteRunOutputs(const RunState& state, const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory '" + dir.string() + "'");

  WriteText(dir / "evolution.json", EvolutionLogJson(state.results).dump(2) + "\n");
  WriteText(dir / "labels.json", LabelReportJson(state.results).dump(2) + "\n");
  ExportRiver(BuildRiver(state.results, state.docs, state.quality, state.vocab),
              dir / "river.json");
  ExportFeatures(state.results, state.docs, dir / "features.csv");
  {
    std::ostringstream vocab;
    WriteVocabularyTsv(vocab, state.vocab);
    WriteText(dir / "vocab.tsv", vocab.str());
  }
  WriteText(dir / "config.toml", state.config.Canonical());
  WriteText(dir / "run_state.json", RunStateToJson(state).dump() + "\n");
}

fs::path MakeRunDirectory(const RunConfig& config) {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  auto stamp = FormatTimestamp(now);
  stamp.erase(std::remove_if(stamp.begin(), stamp.end(),
                             [](char c) { return c == '-' || c == ':'; }),
              stamp.end());
  const fs::path base = fs::path(config.output_dir) / (config.Hash() + "-" + stamp);
  fs::path dir = base;
  for (int n = 1; fs::exists(dir); ++n) {
    dir = base.string() + "-" + std::to_string(n);
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory '" + dir.string() + "'");
  return dir;
}

std::string SliceSummaryLine(const SliceResult& r) {
  std::ostringstream out;
  out << "slice " << r.t << " " << r.period_label << " docs=" << r.doc_indices.size();
  if (r.carried) {
    out << " carried";
    return out.str();
  }
  out << " flagged=[";
  for (std::size_t i = 0; i < r.anomaly_topics.size(); ++i) {
    out << (i ? "," : "") << r.anomaly_topics[i];
  }
  out << "]";
  if (!r.evaluated) out << " (no predecessor)";
  if (!r.labels.empty()) {
    double sum = 0.0;
    for (const auto& b : r.labels) sum += b.coherence;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", sum / static_cast<double>(r.labels.size()));
    out << " coherence=" << buf;
  }
  return out.str();
}

}  // namespace topicstream
