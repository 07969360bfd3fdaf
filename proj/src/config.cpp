#include "topicstream/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "topicstream/checksum.hpp"
#include "topicstream/corpus.hpp"
#include "topicstream/error.hpp"

namespace topicstream {

namespace {

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string Unquote(std::string_view key, std::string_view v) {
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'')) {
    if (v.back() != v.front()) {
      throw ValidationError(std::string(key) + ": unterminated string");
    }
    return std::string(v.substr(1, v.size() - 2));
  }
  return std::string(v);
}

double ParseReal(std::string_view key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(x)) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ValidationError(std::string(key) + ": expected a number, got '" + v + "'");
  }
}

long long ParseInt(std::string_view key, const std::string& v) {
  long long x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ValidationError(std::string(key) + ": expected an integer, got '" + v + "'");
  }
  return x;
}

std::size_t ParseCount(std::string_view key, const std::string& v) {
  const long long x = ParseInt(key, v);
  if (x < 0) throw ValidationError(std::string(key) + " must be >= 0");
  return static_cast<std::size_t>(x);
}

int ParseSmallInt(std::string_view key, const std::string& v) {
  const long long x = ParseInt(key, v);
  if (x < -2147483647LL || x > 2147483647LL) {
    throw ValidationError(std::string(key) + ": out of range");
  }
  return static_cast<int>(x);
}

bool ParseBool(std::string_view key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ValidationError(std::string(key) + ": expected true or false, got '" + v + "'");
}

std::string Real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string Quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

std::map<std::string, std::string> Fields(const RunConfig& c) {
  return {
      {"K", std::to_string(c.K)},
      {"alpha", Real(c.Alpha())},
      {"base_beta", Real(c.base_beta)},
      {"epsilon_floor", Real(c.epsilon_floor)},
      {"n_sweeps", std::to_string(c.n_sweeps)},
      {"burn_in", std::to_string(c.burn_in)},
      {"sample_lag", std::to_string(c.sample_lag)},
      {"seed", std::to_string(c.seed)},
      {"window_w", std::to_string(c.window_w)},
      {"lambda", Real(c.lambda)},
      {"mode", Quoted(std::string(PriorModeName(c.mode)))},
      {"pmi_threshold", Real(c.pmi_threshold)},
      {"min_count", std::to_string(c.min_count)},
      {"min_document_frequency", std::to_string(c.min_document_frequency)},
      {"top_n", std::to_string(c.top_n)},
      {"top_m", std::to_string(c.top_m)},
      {"coherence_N", std::to_string(c.coherence_N)},
      {"eta", Real(c.eta)},
      {"outlier_method", Quoted(std::string(OutlierMethodName(c.outlier_method)))},
      {"softmax_compat", c.softmax_compat ? "true" : "false"},
      {"granularity", Quoted(c.granularity)},
      {"start", Quoted(c.start)},
      {"end", Quoted(c.end)},
      {"input", Quoted(c.input)},
      {"input_format", Quoted(c.input_format)},
      {"stopwords", Quoted(c.stopwords)},
      {"output_dir", Quoted(c.output_dir)},
  };
}

}  // namespace

std::vector<std::string> ConfigKeys() {
  std::vector<std::string> keys;
  for (const auto& [k, v] : Fields(RunConfig{})) keys.push_back(k);
  return keys;
}

void RunConfig::Set(std::string_view key, std::string_view raw) {
  const std::string v = Unquote(key, Trim(raw));
  if (key == "K") {
    K = ParseCount(key, v);
  } else if (key == "alpha") {
    alpha = ParseReal(key, v);
  } else if (key == "base_beta") {
    base_beta = ParseReal(key, v);
  } else if (key == "epsilon_floor") {
    epsilon_floor = ParseReal(key, v);
  } else if (key == "n_sweeps") {
    n_sweeps = ParseSmallInt(key, v);
  } else if (key == "burn_in") {
    burn_in = ParseSmallInt(key, v);
  } else if (key == "sample_lag") {
    sample_lag = ParseSmallInt(key, v);
  } else if (key == "seed") {
    const long long s = ParseInt(key, v);
    if (s < 0) throw ValidationError("seed must be >= 0");
    seed = static_cast<std::uint64_t>(s);
  } else if (key == "window_w") {
    window_w = ParseSmallInt(key, v);
  } else if (key == "lambda") {
    lambda = ParseReal(key, v);
  } else if (key == "mode") {
    const auto m = ParsePriorMode(v);
    if (!m) throw ValidationError("mode: expected iedl, idea_like or olda, got '" + v + "'");
    mode = *m;
  } else if (key == "pmi_threshold") {
    pmi_threshold = ParseReal(key, v);
  } else if (key == "min_count") {
    min_count = ParseSmallInt(key, v);
  } else if (key == "min_document_frequency") {
    min_document_frequency = ParseSmallInt(key, v);
  } else if (key == "top_n") {
    top_n = ParseCount(key, v);
  } else if (key == "top_m") {
    top_m = ParseCount(key, v);
  } else if (key == "coherence_N") {
    coherence_N = ParseCount(key, v);
  } else if (key == "eta") {
    eta = ParseReal(key, v);
  } else if (key == "outlier_method") {
    const auto m = ParseOutlierMethod(v);
    if (!m) throw ValidationError("outlier_method: expected boxplot or mad, got '" + v + "'");
    outlier_method = *m;
  } else if (key == "softmax_compat") {
    softmax_compat = ParseBool(key, v);
  } else if (key == "granularity") {
    granularity = v;
  } else if (key == "start") {
    start = v;
  } else if (key == "end") {
    end = v;
  } else if (key == "input") {
    input = v;
  } else if (key == "input_format") {
    input_format = v;
  } else if (key == "stopwords") {
    stopwords = v;
  } else if (key == "output_dir") {
    output_dir = v;
  } else {
    throw ValidationError("unknown config key '" + std::string(key) + "'");
  }
}

void RunConfig::Validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError(msg); };
  if (K < 2) fail("K must be >= 2");
  if (!(Alpha() > 0.0)) fail("alpha must be > 0");
  if (!(base_beta > 0.0)) fail("base_beta must be > 0");
  if (!(epsilon_floor > 0.0)) fail("epsilon_floor must be > 0");
  if (epsilon_floor > base_beta) fail("epsilon_floor must not exceed base_beta");
  if (burn_in < 0) fail("burn_in must be >= 0");
  if (n_sweeps <= burn_in) fail("n_sweeps must be greater than burn_in");
  if (sample_lag < 1) fail("sample_lag must be >= 1");
  if (window_w < 1) fail("window_w must be >= 1");
  if (!(lambda >= 0.0)) fail("lambda must be >= 0");
  if (min_count < 1) fail("min_count must be >= 1");
  if (min_document_frequency < 1) fail("min_document_frequency must be >= 1");
  if (top_n < 1) fail("top_n must be >= 1");
  if (top_m < 1) fail("top_m must be >= 1");
  if (coherence_N < 2) fail("coherence_N must be >= 2");
  if (!(eta >= 0.0)) fail("eta must be >= 0");
  if (granularity != "month") fail("granularity: only 'month' is supported");
  if (!ParsePostFormat(input_format)) {
    fail("input_format: expected jsonl, csv or stackexchange_xml");
  }
  const auto s = start.empty() ? std::nullopt : Period::Parse(start);
  const auto e = end.empty() ? std::nullopt : Period::Parse(end);
  if (!start.empty() && !s) fail("start: expected YYYY-MM");
  if (!end.empty() && !e) fail("end: expected YYYY-MM");
  if (s && e && *e < *s) fail("end must not precede start");
}

std::string RunConfig::Canonical() const {
  std::string out;
  for (const auto& [k, v] : Fields(*this)) out += k + " = " + v + "\n";
  return out;
}

std::string RunConfig::Hash() const { return HexDigest(Fnv1a(Canonical())); }

nlohmann::json RunConfig::ToJson() const {
  return {
      {"K", K},
      {"alpha", Alpha()},
      {"base_beta", base_beta},
      {"epsilon_floor", epsilon_floor},
      {"n_sweeps", n_sweeps},
      {"burn_in", burn_in},
      {"sample_lag", sample_lag},
      {"seed", seed},
      {"window_w", window_w},
      {"lambda", lambda},
      {"mode", PriorModeName(mode)},
      {"pmi_threshold", pmi_threshold},
      {"min_count", min_count},
      {"min_document_frequency", min_document_frequency},
      {"top_n", top_n},
      {"top_m", top_m},
      {"coherence_N", coherence_N},
      {"eta", eta},
      {"outlier_method", OutlierMethodName(outlier_method)},
      {"softmax_compat", softmax_compat},
      {"granularity", granularity},
      {"start", start},
      {"end", end},
      {"input", input},
      {"input_format", input_format},
      {"stopwords", stopwords},
      {"output_dir", output_dir},
  };
}

StreamConfig RunConfig::ToStream() const {
  StreamConfig s;
  s.topics = K;
  s.alpha = Alpha();
  s.base_beta = base_beta;
  s.epsilon_floor = epsilon_floor;
  s.n_sweeps = n_sweeps;
  s.burn_in = burn_in;
  s.sample_lag = sample_lag;
  s.seed = seed;
  s.decay = {window_w, lambda, mode};
  s.softmax_compat = softmax_compat;
  s.outlier = outlier_method;
  return s;
}

LabelOptions RunConfig::ToLabels() const {
  return {top_n, top_m, coherence_N, eta};
}

RunConfig ParseConfig(std::string_view text, RunConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    // Comments outside quotes.
    bool quoted = false;
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (quoted && c == quote) {
        quoted = false;
      } else if (!quoted && (c == '"' || c == '\'')) {
        quoted = true;
        quote = c;
      } else if (!quoted && c == '#') {
        line = line.substr(0, i);
        break;
      }
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError("config line " + std::to_string(line_no) +
                            ": expected key = value");
    }
    base.Set(Trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return base;
}

RunConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto config = ParseConfig(buf.str());
  // Relative paths in the file resolve against its directory.
  const auto dir = path.parent_path();
  for (auto* p : {&config.input, &config.stopwords}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative() && !dir.empty()) {
      *p = (dir / *p).lexically_normal().string();
    }
  }
  return config;
}

void ApplyOverride(RunConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ValidationError("override '" + std::string(assignment) +
                          "': expected key=value");
  }
  config.Set(Trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

}  // namespace topicstream
