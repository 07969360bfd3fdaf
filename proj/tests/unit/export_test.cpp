#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "topicstream/error.hpp"
#include "topicstream/export.hpp"
#include "topicstream/labeling.hpp"
#include "topicstream/random.hpp"

using namespace topicstream;
namespace fs = std::filesystem;

namespace {

fs::path TempDir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("topicstream_export_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

RiverSeries OneTopic(std::vector<double> widths, std::vector<bool> emerging) {
  RiverSeries river;
  for (std::size_t j = 0; j < widths.size(); ++j) river.slices.push_back("2017-0" + std::to_string(j + 1));
  river.topics.push_back({0, "word_embedding", std::move(widths), std::move(emerging)});
  return river;
}

std::size_t Count(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("branch width examples") {
  const double q = QualityScore(9, 9, 9, 0.1);
  const std::vector<LabelContribution> one{{"a", 1, 0.9}};
  CHECK(BranchWidth(one) == 0.0);
  const std::vector<LabelContribution> ten{{"a", 10, q}};
  CHECK(BranchWidth(ten) == doctest::Approx(1.8257508006425522).epsilon(1e-9));
  const std::vector<LabelContribution> two{{"a", 10, q}, {"b", 4, 0.5}};
  const std::vector<LabelContribution> second{{"b", 4, 0.5}};
  CHECK(BranchWidth(two) == doctest::Approx(BranchWidth(ten) + BranchWidth(second)));
  CHECK(BranchWidth(std::vector<LabelContribution>{{"a", 0, 1.0}}) == 0.0);
  CHECK(BranchWidth(std::vector<LabelContribution>{}) == 0.0);
}

TEST_CASE("slice label contributions count phrase occurrences") {
  Vocabulary vocab;
  const int phrase = vocab.Add("word_embedding");
  const int other = vocab.Add("model");
  vocab.is_phrase = {true, false};
  const std::vector<ProcessedDoc> docs{
      {"p1", {phrase, phrase, other}}, {"p2", {phrase}}, {"p3", {other}}};
  const std::vector<double> quality{0.2, 0.9, 0.5};
  SliceResult r;
  r.doc_indices = {0, 1, 2};
  r.phi = RealMatrix(1, 2, 0.5);
  r.theta = RealMatrix(3, 1, 1.0);
  TopicLabelBundle bundle;
  bundle.phrases = {{phrase, "word_embedding", 0.5}};
  r.labels = {bundle};
  const auto c = SliceLabelContributions(r, 0, docs, quality);
  REQUIRE(c.size() == 1);
  CHECK(c[0].count == 3);
  CHECK(c[0].best_post_quality == 0.9);
  CHECK(BranchWidth(c) == doctest::Approx(std::log(3.0) * 0.9));
  CHECK(SliceLabelContributions(r, 5, docs, quality).empty());
}

TEST_CASE("river json for one topic over two slices") {
  const double w = std::log(10.0) * QualityScore(9, 9, 9, 0.1);
  const auto river = OneTopic({0.0, w}, {false, false});
  const auto j = RiverToJson(river);
  REQUIRE(j["topics"].size() == 1);
  REQUIRE(j["topics"][0]["widths"].size() == 2);
  CHECK(j["topics"][0]["widths"][0].get<double>() == 0.0);
  CHECK(j["topics"][0]["widths"][1].get<double>() == doctest::Approx(1.8258).epsilon(1e-4));
  CHECK(j["slices"].size() == 2);
}

TEST_CASE("emerging topics are highlighted") {
  const auto flagged = OneTopic({1.0, 2.0}, {false, true});
  const auto j = RiverToJson(flagged);
  CHECK(j["topics"][0]["emerging"][0] == false);
  CHECK(j["topics"][0]["emerging"][1] == true);
  const auto html = RenderRiverHtml(flagged);
  CHECK(Count(html, "<circle class=\"emerging\"") == 1);
  CHECK(Count(html, "<td class=\"emerging\">") == 1);

  const auto quiet = RenderRiverHtml(OneTopic({1.0, 2.0}, {false, false}));
  CHECK(Count(quiet, "class=\"emerging\"") == 0);
  CHECK(quiet.find("<script") == std::string::npos);
  CHECK(quiet.find("http://") == quiet.find("http://www.w3.org/2000/svg"));
}

TEST_CASE("html escapes labels") {
  auto river = OneTopic({1.0}, {false});
  river.topics[0].label = "<b>&";
  const auto html = RenderRiverHtml(river);
  CHECK(html.find("&lt;b&gt;&amp;") != std::string::npos);
  CHECK(html.find("<b>&") == std::string::npos);
}

TEST_CASE("wiggle layout stacks bands without gaps") {
  RiverSeries river;
  river.slices = {"a", "b", "c"};
  river.topics.push_back({0, "x", {1, 3, 2}, {false, false, false}});
  river.topics.push_back({1, "y", {2, 2, 0}, {false, false, false}});
  const auto layout = WiggleLayout(river);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(layout.upper[0][j] - layout.lower[0][j] == doctest::Approx(river.topics[0].widths[j]));
    CHECK(layout.lower[1][j] == doctest::Approx(layout.upper[0][j]));
    CHECK(layout.upper[1][j] - layout.lower[1][j] == doctest::Approx(river.topics[1].widths[j]));
  }
  CHECK(layout.lower[0][0] == 0.0);
  // g1 = -((1 + 0) * 3 + (0 + 2) * 2) / 5
  CHECK(layout.lower[0][1] == doctest::Approx(-7.0 / 5.0));
}

TEST_CASE("export river writes json and html deterministically") {
  const auto dir = TempDir("river");
  const auto river = OneTopic({0.5, 1.5}, {false, true});
  ExportRiver(river, dir / "river.json");
  const auto first_json = Slurp(dir / "river.json");
  const auto first_html = Slurp(dir / "river.html");
  CHECK(nlohmann::json::parse(first_json) == RiverToJson(river));
  ExportRiver(river, dir / "river.json");
  CHECK(Slurp(dir / "river.json") == first_json);
  CHECK(Slurp(dir / "river.html") == first_html);
}

TEST_CASE("unwritable paths are io errors") {
  const auto missing = fs::temp_directory_path() / "topicstream_no_such_dir" / "deeper" / "river.json";
  fs::remove_all(missing.parent_path().parent_path());
  try {
    ExportRiver(OneTopic({1.0}, {false}), missing);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kIo);
  }
  CHECK_THROWS_AS(ExportFeatures({}, {}, missing.parent_path() / "f.csv"), Error);
}

TEST_CASE("feature rows") {
  const std::vector<ProcessedDoc> docs{{"a", {}}, {"b", {}}, {"c", {}}};
  SliceResult s0;
  s0.t = 0;
  s0.doc_indices = {0};
  s0.phi = RealMatrix(4, 2, 0.5);
  s0.theta = RealMatrix(1, 4, 0.25);
  SliceResult s2;
  s2.t = 2;
  s2.doc_indices = {2, 1};
  s2.phi = s0.phi;
  s2.theta = RealMatrix(2, 4, 0.25);
  const auto rows = CollectFeatures({s0, s2}, docs);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].theta.size() == 4);
  double sum = 0.0;
  for (double x : rows[0].theta) sum += x;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rows[1].post_id == "c");
  CHECK(rows[1].slice == 2);

  std::ostringstream out;
  WriteFeaturesCsv(out, CollectFeatures({s0}, docs), 4);
  CHECK(out.str() == "post_id,slice,theta_0,theta_1,theta_2,theta_3\na,0,0.25,0.25,0.25,0.25\n");
}

TEST_CASE("feature csv round trip") {
  Rng rng(3);
  std::vector<FeatureRow> rows;
  for (int i = 0; i < 200; ++i) {
    rows.push_back({i % 7 == 0 ? "id,\"quoted\"" + std::to_string(i) : std::to_string(1000 + i),
                    static_cast<std::size_t>(i % 5), SymmetricDirichlet(rng, 6, 0.3)});
  }
  std::stringstream buf;
  WriteFeaturesCsv(buf, rows, 6);
  const auto back = ReadFeaturesCsv(buf);
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].post_id == rows[i].post_id);
    CHECK(back[i].slice == rows[i].slice);
    double sum = 0.0;
    for (std::size_t k = 0; k < 6; ++k) {
      CHECK(std::fabs(back[i].theta[k] - rows[i].theta[k]) < 1e-6);
      sum += back[i].theta[k];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("malformed feature csv is rejected") {
  std::istringstream bad_header("id,slice,theta_0\n");
  CHECK_THROWS_AS(ReadFeaturesCsv(bad_header), Error);
  std::istringstream short_row("post_id,slice,theta_0\na,0\n");
  CHECK_THROWS_AS(ReadFeaturesCsv(short_row), Error);
  std::istringstream text("post_id,slice,theta_0\na,x,0.5\n");
  CHECK_THROWS_AS(ReadFeaturesCsv(text), Error);
  std::istringstream empty("");
  CHECK(ReadFeaturesCsv(empty).empty());
}
