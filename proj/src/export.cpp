#include "topicstream/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "topicstream/error.hpp"

namespace topicstream {

using nlohmann::json;

namespace {

std::string FormatReal(double x, int digits = 12) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, x);
  return buf;
}

std::string HtmlEscape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

// Fixed palette; topics cycle through it.
constexpr const char* kPalette[] = {
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
    "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295",
};

}  // namespace

double BranchWidth(std::span<const LabelContribution> labels) {
  double width = 0.0;
  for (const auto& l : labels) {
    if (l.count < 1) continue;
    width += std::log(static_cast<double>(l.count)) * l.best_post_quality;
  }
  return std::max(width, 0.0);
}

std::vector<LabelContribution> SliceLabelContributions(
    const SliceResult& result, std::size_t topic,
    std::span<const ProcessedDoc> docs, std::span<const double> quality) {
  std::vector<LabelContribution> out;
  if (topic >= result.labels.size()) return out;
  for (const auto& phrase : result.labels[topic].phrases) {
    LabelContribution c;
    c.phrase = phrase.token;
    const std::string* best_id = nullptr;
    double best = -1.0;
    for (std::size_t row = 0; row < result.doc_indices.size(); ++row) {
      const auto& doc = docs[result.doc_indices[row]];
      const auto n = std::count(doc.token_ids.begin(), doc.token_ids.end(), phrase.id);
      if (n == 0) continue;
      c.count += n;
      const double relevance =
          row < result.theta.rows() ? result.theta(row, topic) : 0.0;
      const double q = quality[result.doc_indices[row]];
      const double score = relevance * q;
      if (best_id == nullptr || score > best ||
          (score == best && doc.post_id < *best_id)) {
        best = score;
        best_id = &doc.post_id;
        c.best_post_quality = q;
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

RiverSeries BuildRiver(const std::vector<SliceResult>& results,
                       std::span<const ProcessedDoc> docs,
                       std::span<const double> quality, const Vocabulary& vocab) {
  RiverSeries river;
  if (results.empty()) return river;
  const std::size_t k_topics = results.front().phi.rows();
  for (const auto& r : results) river.slices.push_back(r.period_label);
  river.topics.resize(k_topics);
  for (std::size_t k = 0; k < k_topics; ++k) {
    auto& topic = river.topics[k];
    topic.k = static_cast<int>(k);
    for (const auto& r : results) {
      topic.widths.push_back(
          BranchWidth(SliceLabelContributions(r, k, docs, quality)));
      topic.emerging.push_back(std::find(r.anomaly_topics.begin(),
                                         r.anomaly_topics.end(),
                                         static_cast<int>(k)) !=
                               r.anomaly_topics.end());
    }
    // Label from the most recent trained slice; top word when no phrase.
    for (auto it = results.rbegin(); it != results.rend(); ++it) {
      if (it->carried && it != results.rend() - 1) continue;
      if (k < it->labels.size() && !it->labels[k].phrases.empty()) {
        topic.label = it->labels[k].phrases.front().token;
      } else if (vocab.size() > 0) {
        topic.label = vocab.id_to_token[TopWords(it->phi.row(k), 1).front()];
      }
      break;
    }
  }
  return river;
}

json RiverToJson(const RiverSeries& river) {
  json topics = json::array();
  for (const auto& t : river.topics) {
    json e = json::array();
    for (bool b : t.emerging) e.push_back(b);
    topics.push_back({{"k", t.k},
                      {"label", t.label},
                      {"widths", t.widths},
                      {"emerging", std::move(e)}});
  }
  return {{"slices", river.slices}, {"topics", std::move(topics)}};
}

StreamLayout WiggleLayout(const RiverSeries& river) {
  const std::size_t n = river.topics.size();
  const std::size_t m = river.slices.size();
  StreamLayout layout;
  layout.lower.assign(n, std::vector<double>(m, 0.0));
  layout.upper.assign(n, std::vector<double>(m, 0.0));
  if (n == 0 || m == 0) return layout;
  auto f = [&](std::size_t i, std::size_t j) { return river.topics[i].widths[j]; };
  // Baseline g(j) = g(j-1) - sum_i f_i(j) * (df_i/2 + sum_{k<i} df_k) / sum_i f_i(j)
  std::vector<double> baseline(m, 0.0);
  for (std::size_t j = 1; j < m; ++j) {
    double s1 = 0.0;
    double s2 = 0.0;
    double below = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double df = f(i, j) - f(i, j - 1);
      s1 += f(i, j);
      s2 += (df / 2.0 + below) * f(i, j);
      below += df;
    }
    baseline[j] = baseline[j - 1] - (s1 > 0.0 ? s2 / s1 : 0.0);
  }
  for (std::size_t j = 0; j < m; ++j) {
    double y = baseline[j];
    for (std::size_t i = 0; i < n; ++i) {
      layout.lower[i][j] = y;
      y += f(i, j);
      layout.upper[i][j] = y;
    }
  }
  return layout;
}

std::string RenderRiverHtml(const RiverSeries& river) {
  constexpr double kWidth = 960.0;
  constexpr double kHeight = 420.0;
  constexpr double kMargin = 40.0;
  const auto layout = WiggleLayout(river);
  const std::size_t n = river.topics.size();
  const std::size_t m = river.slices.size();

  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!any) {
        lo = layout.lower[i][j];
        hi = layout.upper[i][j];
        any = true;
      }
      lo = std::min(lo, layout.lower[i][j]);
      hi = std::max(hi, layout.upper[i][j]);
    }
  }
  const double span = hi - lo > 0.0 ? hi - lo : 1.0;
  auto x = [&](std::size_t j) {
    return m <= 1 ? kWidth / 2.0
                  : kMargin + (kWidth - 2 * kMargin) * static_cast<double>(j) /
                                  static_cast<double>(m - 1);
  };
  auto y = [&](double v) {
    return kMargin + (kHeight - 2 * kMargin) * (1.0 - (v - lo) / span);
  };

  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n"
      << "<title>Topic stream</title>\n<style>\n"
      << "body{font-family:sans-serif;margin:24px;color:#222}\n"
      << "svg{background:#fafafa;border:1px solid #ddd}\n"
      << "path.band{stroke:#fff;stroke-width:0.5;opacity:0.85}\n"
      << "path.band:hover{opacity:1}\n"
      << "circle.emerging{fill:#ffe600;stroke:#333;stroke-width:1}\n"
      << "td.emerging,li.emerging{background:#ffe600;font-weight:bold}\n"
      << "table{border-collapse:collapse;margin-top:16px}\n"
      << "td,th{border:1px solid #ccc;padding:2px 6px;font-size:12px}\n"
      << "</style>\n</head>\n<body>\n<h1>Topic stream</h1>\n";

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
      << kHeight << "\">\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& topic = river.topics[i];
    out << "<path class=\"band\" fill=\"" << kPalette[i % std::size(kPalette)]
        << "\" d=\"";
    for (std::size_t j = 0; j < m; ++j) {
      out << (j == 0 ? 'M' : 'L') << FormatReal(x(j), 6) << ','
          << FormatReal(y(layout.upper[i][j]), 6) << ' ';
    }
    for (std::size_t j = m; j-- > 0;) {
      out << 'L' << FormatReal(x(j), 6) << ','
          << FormatReal(y(layout.lower[i][j]), 6) << ' ';
    }
    out << "Z\"><title>topic " << topic.k << ": " << HtmlEscape(topic.label)
        << "</title></path>\n";
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      if (!river.topics[i].emerging[j]) continue;
      const double mid = 0.5 * (layout.lower[i][j] + layout.upper[i][j]);
      out << "<circle class=\"emerging\" cx=\"" << FormatReal(x(j), 6)
          << "\" cy=\"" << FormatReal(y(mid), 6) << "\" r=\"5\"><title>"
          << "emerging in " << HtmlEscape(river.slices[j]) << ": topic "
          << river.topics[i].k << " " << HtmlEscape(river.topics[i].label)
          << "</title></circle>\n";
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    out << "<text x=\"" << FormatReal(x(j), 6) << "\" y=\"" << kHeight - 10
        << "\" font-size=\"11\" text-anchor=\"middle\">"
        << HtmlEscape(river.slices[j]) << "</text>\n";
  }
  out << "</svg>\n";

  out << "<table>\n<tr><th>topic</th><th>label</th>";
  for (const auto& s : river.slices) out << "<th>" << HtmlEscape(s) << "</th>";
  out << "</tr>\n";
  for (const auto& topic : river.topics) {
    out << "<tr><td>" << topic.k << "</td><td>" << HtmlEscape(topic.label)
        << "</td>";
    for (std::size_t j = 0; j < m; ++j) {
      out << (topic.emerging[j] ? "<td class=\"emerging\">" : "<td>")
          << FormatReal(topic.widths[j], 4) << "</td>";
    }
    out << "</tr>\n";
  }
  out << "</table>\n</body>\n</html>\n";
  return out.str();
}

void ExportRiver(const RiverSeries& river, const std::filesystem::path& json_path) {
  {
    std::ofstream out(json_path, std::ios::binary);
    if (!out) throw IoError("cannot write river file '" + json_path.string() + "'");
    out << RiverToJson(river).dump(2) << '\n';
    if (!out) throw IoError("write failed for '" + json_path.string() + "'");
  }
  auto html_path = json_path;
  html_path.replace_extension(".html");
  std::ofstream out(html_path, std::ios::binary);
  if (!out) throw IoError("cannot write river page '" + html_path.string() + "'");
  out << RenderRiverHtml(river);
  if (!out) throw IoError("write failed for '" + html_path.string() + "'");
}

std::vector<FeatureRow> CollectFeatures(const std::vector<SliceResult>& results,
                                        std::span<const ProcessedDoc> docs) {
  std::vector<FeatureRow> rows;
  for (const auto& r : results) {
    for (std::size_t row = 0; row < r.doc_indices.size(); ++row) {
      FeatureRow f;
      f.post_id = docs[r.doc_indices[row]].post_id;
      f.slice = r.t;
      f.theta.assign(r.theta.row(row).begin(), r.theta.row(row).end());
      rows.push_back(std::move(f));
    }
  }
  return rows;
}

void WriteFeaturesCsv(std::ostream& out, const std::vector<FeatureRow>& rows,
                      std::size_t topics) {
  out << "post_id,slice";
  for (std::size_t k = 0; k < topics; ++k) out << ",theta_" << k;
  out << '\n';
  for (const auto& r : rows) {
    out << CsvField(r.post_id) << ',' << r.slice;
    for (double v : r.theta) out << ',' << FormatReal(v);
    out << '\n';
  }
}

void ExportFeatures(const std::vector<SliceResult>& results,
                    std::span<const ProcessedDoc> docs,
                    const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write features '" + path.string() + "'");
  const std::size_t topics = results.empty() ? 0 : results.front().phi.rows();
  WriteFeaturesCsv(out, CollectFeatures(results, docs), topics);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<FeatureRow> ReadFeaturesCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) return {};
  const auto header = SplitCsvLine(line);
  if (header.size() < 2 || header[0] != "post_id" || header[1] != "slice") {
    throw ValidationError("features: unexpected header");
  }
  const std::size_t topics = header.size() - 2;
  std::vector<FeatureRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = SplitCsvLine(line);
    if (fields.size() != topics + 2) {
      throw ValidationError("features: row has the wrong number of columns");
    }
    FeatureRow r;
    r.post_id = fields[0];
    try {
      r.slice = static_cast<std::size_t>(std::stoull(fields[1]));
      for (std::size_t k = 0; k < topics; ++k) {
        r.theta.push_back(std::stod(fields[k + 2]));
      }
    } catch (const std::exception&) {
      throw ValidationError("features: non-numeric field");
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace topicstream
