#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "topicstream/corpus.hpp"
#include "topicstream/error.hpp"
#include "topicstream/preprocess.hpp"
#include "topicstream/synth.hpp"

using namespace topicstream;

namespace {

SynthParams Small() {
  SynthParams p;
  p.topics = 4;
  p.vocab_size = 50;
  p.docs_per_slice = 20;
  p.doc_length = 15;
  p.slices = 4;
  p.shift_slice = 2;
  p.shift_topic = 1;
  p.seed = 5;
  return p;
}

}  // namespace

TEST_CASE("shape of a generated corpus") {
  const auto c = GenerateSynthetic(Small());
  CHECK(c.docs.size() == 80);
  CHECK(c.posts.size() == 80);
  CHECK(c.slice_docs.size() == 4);
  CHECK(c.true_topics.size() == 4);
  CHECK(c.period_labels == std::vector<std::string>{"2017-01", "2017-02", "2017-03", "2017-04"});
  for (const auto& d : c.docs) {
    CHECK(d.length() == 15);
    for (int w : d.token_ids) CHECK(w < 50);
  }
  for (const auto& m : c.true_topics) {
    for (std::size_t k = 0; k < m.rows(); ++k) {
      CHECK(std::accumulate(m.row(k).begin(), m.row(k).end(), 0.0) == doctest::Approx(1.0));
    }
  }
  for (std::size_t t = 0; t < 4; ++t) {
    for (std::size_t d : c.slice_docs[t]) {
      CHECK(Period::Of(c.posts[d].created_at).Label() == c.period_labels[t]);
    }
  }
}

TEST_CASE("the shift replaces one topic from the shift slice on") {
  const auto c = GenerateSynthetic(Small());
  auto diff = [&](std::size_t t, std::size_t k) {
    double s = 0.0;
    for (std::size_t w = 0; w < 50; ++w) s += std::fabs(c.true_topics[t](k, w) - c.true_topics[t - 1](k, w));
    return s;
  };
  CHECK(diff(1, 1) == 0.0);
  CHECK(diff(2, 1) > 1.0);
  CHECK(diff(3, 1) == 0.0);
  for (std::size_t k : {0u, 2u, 3u}) CHECK(diff(2, k) == 0.0);
  const auto truth = GroundTruthJson(c);
  CHECK(truth["shift_slice"] == 2);
  CHECK(truth["shift_topic"] == 1);
  CHECK(truth["no_shift"] == false);
}

TEST_CASE("zero magnitude means no shift") {
  auto p = Small();
  p.shift_magnitude = 0.0;
  const auto c = GenerateSynthetic(p);
  const auto truth = GroundTruthJson(c);
  CHECK(truth["no_shift"] == true);
  CHECK(c.true_topics[3] == c.true_topics[0]);
}

TEST_CASE("fixed seed gives identical corpora") {
  const auto a = GenerateSynthetic(Small());
  const auto b = GenerateSynthetic(Small());
  std::ostringstream sa, sb;
  WriteJsonl(sa, a.posts);
  WriteJsonl(sb, b.posts);
  CHECK(sa.str() == sb.str());
  auto p = Small();
  p.seed = 6;
  std::ostringstream sc;
  WriteJsonl(sc, GenerateSynthetic(p).posts);
  CHECK(sc.str() != sa.str());
}

TEST_CASE("drift changes every topic a little") {
  auto p = Small();
  p.shift_slice = -1;
  p.drift = 0.3;
  const auto c = GenerateSynthetic(p);
  CHECK_FALSE(c.true_topics[1] == c.true_topics[0]);
}

TEST_CASE("pseudo words survive preprocessing") {
  const RuleLemmatizer lem;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < 500; ++i) {
    const auto w = SyntheticWord(i);
    CHECK(seen.insert(w).second);
    CHECK(Normalize(w) == w);
    CHECK(lem.Lemmatize(w) == w);
    CHECK_FALSE(StopwordList::Default().Contains(w));
  }
  const auto c = GenerateSynthetic(Small());
  const auto vocab = SyntheticVocabulary(c);
  CHECK(vocab.size() == 50);
  CHECK(*vocab.Find(c.words[7]) == 7);
}

TEST_CASE("invalid parameters") {
  auto p = Small();
  p.shift_slice = 4;
  CHECK_THROWS_AS(GenerateSynthetic(p), Error);
  p = Small();
  p.shift_slice = 0;
  CHECK_THROWS_AS(GenerateSynthetic(p), Error);
  p = Small();
  p.shift_topic = 4;
  CHECK_THROWS_AS(GenerateSynthetic(p), Error);
  p = Small();
  p.vocab_size = 8;
  CHECK_THROWS_AS(GenerateSynthetic(p), Error);
  p = Small();
  p.shift_magnitude = 1.5;
  CHECK_THROWS_AS(GenerateSynthetic(p), Error);
  p = Small();
  p.topics = 1;
  CHECK_THROWS_AS(GenerateSynthetic(p), Error);
}
