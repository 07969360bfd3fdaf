#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "topicstream/labeling.hpp"
#include "topicstream/random.hpp"
#include "topicstream/tracker.hpp"

using namespace topicstream;

namespace {

struct CoherenceFixture {
  Vocabulary vocab;
  std::vector<ProcessedDoc> docs;
};

CoherenceFixture TenDocCorpus() {
  const std::vector<std::vector<std::string>> raw{
      {"cnn", "image", "pixel"},
      {"cnn", "image"},
      {"image", "pixel", "layer"},
      {"rnn", "word", "embedding"},
      {"word", "embedding", "vector"},
      {"rnn", "word"},
      {"cnn", "layer"},
      {"pixel", "value"},
      {"word", "vector"},
      {"image", "cnn", "pixel", "layer"},
  };
  CoherenceFixture f;
  for (std::size_t d = 0; d < raw.size(); ++d) {
    ProcessedDoc doc;
    doc.post_id = std::to_string(d);
    for (const auto& w : raw[d]) doc.token_ids.push_back(f.vocab.Add(w));
    f.docs.push_back(doc);
  }
  return f;
}

std::vector<int> Ids(const Vocabulary& vocab, const std::vector<std::string>& words) {
  std::vector<int> ids;
  for (const auto& w : words) ids.push_back(*vocab.Find(w));
  return ids;
}

Vocabulary PhraseVocab() {
  Vocabulary v;
  v.Add("model");
  v.Add("word_embedding");
  v.Add("neural_network");
  v.Add("layer");
  v.Add("learning_rate");
  v.is_phrase = {false, true, true, false, true};
  return v;
}

}  // namespace

TEST_CASE("quality score examples") {
  CHECK(QualityScore(9, 9, 9, 0.1) == doctest::Approx(0.7929134980495044).epsilon(1e-12));
  CHECK(QualityScore(0, 1000, 50, 0.1) == 0.0);
  CHECK(QualityScore(10, 0, 50, 0.1) == 0.0);
  CHECK(QualityScore(10, 100, 0, 0.1) == 0.0);
  CHECK(QualityScore(-5, 100, 50, 0.1) == 0.0);
  CHECK(QualityScore(1000000000, 1000000000, 1000000000, 0.1) > 0.99);
  CHECK(QualityScore(9, 9, 0, 0.0) == 0.0);
  CHECK(QualityScore(9, 9, 9, 0.0) == doctest::Approx(std::exp(-1.0 / std::pow(std::log(10.0), 2))));
}

TEST_CASE("quality score range and monotonicity fuzz") {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const auto v = static_cast<std::int64_t>(UniformIndex(rng, 5000));
    const auto r = static_cast<std::int64_t>(UniformIndex(rng, 100000));
    const auto h = static_cast<std::int64_t>(UniformIndex(rng, 500));
    const double eta = Uniform01(rng);
    const double q = QualityScore(v, r, h, eta);
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
    CHECK(QualityScore(v + 1, r, h, eta) >= q);
    CHECK(QualityScore(v, r + 1, h, eta) >= q);
    CHECK(QualityScore(v, r, h + 1, eta) >= q);
    if (h >= 1 && q > 0.0) CHECK(QualityScore(v, r, h, eta + 0.1) < q);
  }
}

TEST_CASE("rank phrases") {
  const auto vocab = PhraseVocab();
  const std::vector<double> phi{0.4, 0.3, 0.1, 0.1, 0.1};
  const auto ranked = RankPhrases(phi, vocab, 2);
  REQUIRE(ranked.phrases.size() == 2);
  CHECK(ranked.phrases[0].token == "word_embedding");
  CHECK(ranked.phrases[0].weight == 0.3);
  // Equal weights: lower id first.
  CHECK(ranked.phrases[1].token == "neural_network");
  CHECK_FALSE(ranked.short_list);

  const auto all = RankPhrases(phi, vocab, 10);
  CHECK(all.phrases.size() == 3);
  CHECK(all.short_list);

  Vocabulary plain;
  plain.Add("model");
  plain.Add("layer");
  plain.is_phrase = {false, false};
  const auto none = RankPhrases(std::vector<double>{0.5, 0.5}, plain, 3);
  CHECK(none.phrases.empty());
  CHECK(none.short_list);
}

TEST_CASE("rank phrases is prefix stable") {
  Rng rng(9);
  Vocabulary vocab;
  for (int i = 0; i < 40; ++i) vocab.Add("w" + std::to_string(i));
  vocab.is_phrase.assign(40, false);
  for (int i = 0; i < 40; i += 3) vocab.is_phrase[i] = true;
  for (int trial = 0; trial < 100; ++trial) {
    auto phi = SymmetricDirichlet(rng, 40, 0.5);
    phi[3] = phi[6];  // force a tie
    const auto longer = RankPhrases(phi, vocab, 10);
    for (std::size_t n = 1; n < 10; ++n) {
      const auto shorter = RankPhrases(phi, vocab, n);
      for (std::size_t i = 0; i < shorter.phrases.size(); ++i) {
        CHECK(shorter.phrases[i].id == longer.phrases[i].id);
      }
    }
  }
}

TEST_CASE("top words") {
  const std::vector<double> phi{0.1, 0.4, 0.1, 0.4};
  CHECK(TopWords(phi, 3) == std::vector<int>{1, 3, 0});
  CHECK(TopWords(phi, 10).size() == 4);
}

TEST_CASE("representative posts") {
  const std::vector<std::string> ids{"a", "b"};
  RealMatrix theta(2, 2);
  theta(0, 0) = 0.9, theta(0, 1) = 0.1;
  theta(1, 0) = 0.1, theta(1, 1) = 0.9;
  const auto ranked = RepresentativePosts(0, theta, std::vector<double>{0.5, 0.9}, ids, 3);
  REQUIRE(ranked.size() == 2);
  CHECK(ranked[0].post_id == "a");
  CHECK(ranked[0].score == doctest::Approx(0.45));
  CHECK(ranked[1].score == doctest::Approx(0.09));

  RealMatrix equal(2, 2, 0.5);
  const auto demoted = RepresentativePosts(0, equal, std::vector<double>{0.0, 0.8}, ids, 3);
  REQUIRE(demoted.size() == 1);
  CHECK(demoted[0].post_id == "b");

  RealMatrix one(1, 2, 0.5);
  CHECK(RepresentativePosts(0, one, std::vector<double>{0.3}, {ids.data(), 1}, 3).size() == 1);
  CHECK(RepresentativePosts(0, one, std::vector<double>{0.0}, {ids.data(), 1}, 3).empty());
  CHECK(RepresentativePosts(0, RealMatrix(0, 2), {}, {}, 3).empty());

  // Ties broken by post id.
  const std::vector<std::string> tied_ids{"z", "m"};
  const auto tied = RepresentativePosts(0, equal, std::vector<double>{0.4, 0.4}, tied_ids, 3);
  CHECK(tied[0].post_id == "m");
}

TEST_CASE("representative posts respect dominance") {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 2 + UniformIndex(rng, 10);
    RealMatrix theta(n, 3);
    std::vector<double> quality(n);
    std::vector<std::string> ids(n);
    for (std::size_t d = 0; d < n; ++d) {
      const auto row = SymmetricDirichlet(rng, 3, 1.0);
      std::copy(row.begin(), row.end(), theta.row(d).begin());
      quality[d] = Uniform01(rng);
      ids[d] = std::to_string(d);
    }
    const auto ranked = RepresentativePosts(0, theta, quality, ids, n);
    std::map<std::size_t, std::size_t> position;
    for (std::size_t i = 0; i < ranked.size(); ++i) position[ranked[i].doc] = i;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) {
        if (theta(a, 0) > theta(b, 0) && quality[a] > quality[b] && position.count(b)) {
          REQUIRE(position.count(a));
          CHECK(position[a] < position[b]);
        }
      }
    }
  }
}

TEST_CASE("topic coherence matches the brute-force counter") {
  const auto f = TenDocCorpus();
  const CooccurrenceIndex index(f.docs, f.vocab.size());
  CHECK(index.document_count() == 10);
  CHECK(index.DocumentFrequency(*f.vocab.Find("cnn")) == 4);
  CHECK(index.PairDocumentFrequency(*f.vocab.Find("cnn"), *f.vocab.Find("image")) == 3);

  const auto a = Ids(f.vocab, {"cnn", "image", "pixel"});
  CHECK(TopicCoherence(a, index) == doctest::Approx(2.4611901231706836).epsilon(1e-12));
  CHECK(TopicCoherence(Ids(f.vocab, {"cnn", "word", "value"}), index) ==
        doctest::Approx(1.362577834502574).epsilon(1e-12));

  // N=2 is a single smoothed PMI term.
  const double single = TopicCoherence(Ids(f.vocab, {"cnn", "image"}), index);
  CHECK(single == doctest::Approx(std::log((4.0 / 10) / ((4.0 / 10) * (4.0 / 10)))));

  std::vector<int> perm = a;
  std::sort(perm.begin(), perm.end());
  do {
    CHECK(TopicCoherence(perm, index) == doctest::Approx(TopicCoherence(a, index)).epsilon(1e-12));
  } while (std::next_permutation(perm.begin(), perm.end()));
}

TEST_CASE("topic coherence of independent words is near zero") {
  // Four documents: x in the first two, y in the first and third.
  Vocabulary vocab;
  const int x = vocab.Add("x");
  const int y = vocab.Add("y");
  const int z = vocab.Add("z");
  const std::vector<ProcessedDoc> docs{
      {"0", {x, y}}, {"1", {x, z}}, {"2", {y, z}}, {"3", {}}};
  const CooccurrenceIndex index(docs, vocab.size());
  // Each pair co-occurs once; smoothing adds one: ln((2/4)/(1/4)) per pair.
  CHECK(TopicCoherence(std::vector<int>{x, y, z}, index) == doctest::Approx(3 * std::log(2.0)));
  // An unseen word is floored at one document.
  Vocabulary wider = vocab;
  const int unseen = wider.Add("unseen");
  const CooccurrenceIndex wide_index(docs, wider.size());
  CHECK(std::isfinite(TopicCoherence(std::vector<int>{x, unseen}, wide_index)));
}

TEST_CASE("coherence summary") {
  const auto s = SummarizeCoherence(std::vector<double>{0.1, 0.3});
  CHECK(s.mean == doctest::Approx(0.2));
  CHECK(s.standard_error == doctest::Approx(0.1));
  CHECK(s.count == 2);
  const auto one = SummarizeCoherence(std::vector<double>{0.7});
  CHECK(one.mean == 0.7);
  CHECK(one.standard_error == 0.0);
}

TEST_CASE("coherence report averages trained slices") {
  const auto f = TenDocCorpus();
  const CooccurrenceIndex index(f.docs, f.vocab.size());
  SliceResult trained;
  trained.phi = RealMatrix(2, f.vocab.size(), 0.0);
  for (int id : Ids(f.vocab, {"cnn", "image", "pixel"})) trained.phi(0, id) = 1.0 / 3;
  for (int id : Ids(f.vocab, {"word", "embedding", "rnn"})) trained.phi(1, id) = 1.0 / 3;
  SliceResult carried = trained;
  carried.carried = true;
  const auto report = CoherenceReport({trained, carried}, 3, index);
  CHECK(report.count == 2);
  const double c0 = TopicCoherence(Ids(f.vocab, {"cnn", "image", "pixel"}), index);
  const double c1 = TopicCoherence(Ids(f.vocab, {"rnn", "word", "embedding"}), index);
  CHECK(report.mean == doctest::Approx((c0 + c1) / 2));
}

TEST_CASE("label slice bundles phrases posts and coherence") {
  auto f = TenDocCorpus();
  f.vocab.is_phrase.assign(f.vocab.size(), false);
  f.vocab.is_phrase[*f.vocab.Find("embedding")] = true;
  const CooccurrenceIndex index(f.docs, f.vocab.size());
  std::vector<double> quality(f.docs.size(), 0.5);
  LabelContext ctx;
  ctx.vocab = &f.vocab;
  ctx.cooccurrence = &index;
  ctx.docs = f.docs;
  ctx.quality = quality;
  ctx.options.top_n = 3;
  ctx.options.top_m = 2;
  ctx.options.coherence_n = 3;

  RealMatrix phi(2, f.vocab.size(), 0.0);
  for (int id : Ids(f.vocab, {"cnn", "image", "pixel"})) phi(0, id) = 1.0 / 3;
  for (int id : Ids(f.vocab, {"word", "embedding", "rnn"})) phi(1, id) = 1.0 / 3;
  RealMatrix theta(3, 2);
  theta(0, 0) = 0.9, theta(0, 1) = 0.1;
  theta(1, 0) = 0.2, theta(1, 1) = 0.8;
  theta(2, 0) = 0.6, theta(2, 1) = 0.4;
  const std::vector<std::size_t> rows{0, 3, 9};
  const auto bundles = LabelSlice(phi, theta, rows, ctx);
  REQUIRE(bundles.size() == 2);
  CHECK(bundles[0].topic == 0);
  REQUIRE(bundles[0].phrases.size() == 1);
  CHECK(bundles[0].phrases[0].weight == 0.0);
  CHECK(bundles[0].phrases_short);
  CHECK(bundles[0].posts.size() == 2);
  CHECK(bundles[0].posts[0].post_id == "0");
  CHECK(bundles[0].posts[1].post_id == "9");
  CHECK(bundles[0].coherence == doctest::Approx(2.4611901231706836));
  REQUIRE(bundles[1].phrases.size() == 1);
  CHECK(bundles[1].phrases[0].token == "embedding");
  CHECK(bundles[1].posts[0].post_id == "3");
}
