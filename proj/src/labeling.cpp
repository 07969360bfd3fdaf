#include "topicstream/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "topicstream/error.hpp"
#include "topicstream/tracker.hpp"

namespace topicstream {

double QualityScore(std::int64_t votes, std::int64_t views,
                    std::int64_t length_tokens, double eta) {
  const double lv = std::log(static_cast<double>(std::max<std::int64_t>(votes, 0)) + 1.0);
  const double lr = std::log(static_cast<double>(std::max<std::int64_t>(views, 0)) + 1.0);
  const double lh =
      std::log(static_cast<double>(std::max<std::int64_t>(length_tokens, 0)) + 1.0);
  if (lv <= 0.0 || lr <= 0.0 || lh <= 0.0) return 0.0;
  return std::exp(-1.0 / (lv * lr) - eta / lh);
}

namespace {

// Indices sorted by descending weight, ties by ascending index.
std::vector<int> RankIndices(std::span<const double> weights,
                             const std::vector<int>& candidates,
                             std::size_t limit) {
  std::vector<int> order = candidates;
  const auto take = std::min(limit, order.size());
  std::partial_sort(order.begin(), order.begin() + take, order.end(),
                    [&](int a, int b) {
                      if (weights[a] != weights[b]) return weights[a] > weights[b];
                      return a < b;
                    });
  order.resize(take);
  return order;
}

}  // namespace

PhraseRanking RankPhrases(std::span<const double> phi_row,
                          const Vocabulary& vocab, std::size_t top_n) {
  if (top_n < 1) throw ValidationError("rank_phrases: top_n must be >= 1");
  std::vector<int> candidates;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    if (vocab.is_phrase[i]) candidates.push_back(static_cast<int>(i));
  }
  PhraseRanking ranking;
  ranking.short_list = candidates.size() < top_n;
  for (int id : RankIndices(phi_row, candidates, top_n)) {
    ranking.phrases.push_back({id, vocab.id_to_token[id], phi_row[id]});
  }
  return ranking;
}

std::vector<int> TopWords(std::span<const double> phi_row, std::size_t n) {
  std::vector<int> all(phi_row.size());
  std::iota(all.begin(), all.end(), 0);
  return RankIndices(phi_row, all, n);
}

std::vector<RankedPost> RepresentativePosts(
    std::size_t topic, const RealMatrix& theta, std::span<const double> quality,
    std::span<const std::string> post_ids, std::size_t top_m) {
  std::vector<RankedPost> all;
  for (std::size_t d = 0; d < theta.rows(); ++d) {
    const double score = theta(d, topic) * quality[d];
    if (score > 0.0) all.push_back({d, post_ids[d], score});
  }
  const auto take = std::min(top_m, all.size());
  std::partial_sort(all.begin(), all.begin() + take, all.end(),
                    [](const RankedPost& a, const RankedPost& b) {
                      if (a.score != b.score) return a.score > b.score;
                      return a.post_id < b.post_id;
                    });
  all.resize(take);
  return all;
}

CooccurrenceIndex::CooccurrenceIndex(std::span<const ProcessedDoc> docs,
                                     std::size_t vocab_size)
    : document_count_(docs.size()), postings_(vocab_size) {
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (int w : docs[d].token_ids) {
      auto& list = postings_[w];
      if (list.empty() || list.back() != static_cast<int>(d)) {
        list.push_back(static_cast<int>(d));
      }
    }
  }
}

long long CooccurrenceIndex::DocumentFrequency(int word) const {
  if (word < 0 || static_cast<std::size_t>(word) >= postings_.size()) return 0;
  return static_cast<long long>(postings_[word].size());
}

long long CooccurrenceIndex::PairDocumentFrequency(int a, int b) const {
  if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= postings_.size() ||
      static_cast<std::size_t>(b) >= postings_.size()) {
    return 0;
  }
  const auto& x = postings_[a];
  const auto& y = postings_[b];
  long long count = 0;
  std::size_t i = 0, j = 0;
  while (i < x.size() && j < y.size()) {
    if (x[i] < y[j]) {
      ++i;
    } else if (y[j] < x[i]) {
      ++j;
    } else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

double TopicCoherence(std::span<const int> top_words,
                      const CooccurrenceIndex& index) {
  if (top_words.size() < 2) {
    throw ValidationError("topic_coherence: need at least two words");
  }
  const double docs = static_cast<double>(std::max<std::size_t>(index.document_count(), 1));
  double total = 0.0;
  for (std::size_t j = 1; j < top_words.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) {
      const double ci = static_cast<double>(
          std::max<long long>(index.DocumentFrequency(top_words[i]), 1));
      const double cj = static_cast<double>(
          std::max<long long>(index.DocumentFrequency(top_words[j]), 1));
      const double cij =
          static_cast<double>(index.PairDocumentFrequency(top_words[i], top_words[j])) + 1.0;
      total += std::log((cij / docs) / ((ci / docs) * (cj / docs)));
    }
  }
  return total;
}

CoherenceSummary SummarizeCoherence(std::span<const double> values) {
  CoherenceSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  if (values.size() < 2) return s;
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.standard_error =
      std::sqrt(ss / static_cast<double>(values.size() - 1)) /
      std::sqrt(static_cast<double>(values.size()));
  return s;
}

std::vector<TopicLabelBundle> LabelSlice(const RealMatrix& phi,
                                         const RealMatrix& theta,
                                         std::span<const std::size_t> doc_indices,
                                         const LabelContext& context) {
  const auto& opts = context.options;
  std::vector<double> quality;
  std::vector<std::string> post_ids;
  quality.reserve(doc_indices.size());
  post_ids.reserve(doc_indices.size());
  for (std::size_t idx : doc_indices) {
    quality.push_back(context.quality[idx]);
    post_ids.push_back(context.docs[idx].post_id);
  }
  const std::size_t n_words = std::min(opts.coherence_n, phi.cols());
  std::vector<TopicLabelBundle> bundles;
  bundles.reserve(phi.rows());
  for (std::size_t k = 0; k < phi.rows(); ++k) {
    TopicLabelBundle b;
    b.topic = static_cast<int>(k);
    auto ranking = RankPhrases(phi.row(k), *context.vocab, opts.top_n);
    b.phrases = std::move(ranking.phrases);
    b.phrases_short = ranking.short_list;
    if (theta.rows() == doc_indices.size()) {
      b.posts = RepresentativePosts(k, theta, quality, post_ids, opts.top_m);
      for (auto& p : b.posts) p.doc = doc_indices[p.doc];
    }
    if (n_words >= 2 && context.cooccurrence != nullptr) {
      b.coherence = TopicCoherence(TopWords(phi.row(k), n_words),
                                   *context.cooccurrence);
    }
    bundles.push_back(std::move(b));
  }
  return bundles;
}

CoherenceSummary CoherenceReport(const std::vector<SliceResult>& results,
                                 std::size_t n, const CooccurrenceIndex& index) {
  std::vector<double> values;
  for (const auto& r : results) {
    if (r.carried) continue;
    const std::size_t words = std::min(n, r.phi.cols());
    if (words < 2) continue;
    for (std::size_t k = 0; k < r.phi.rows(); ++k) {
      values.push_back(TopicCoherence(TopWords(r.phi.row(k), words), index));
    }
  }
  return SummarizeCoherence(values);
}

}  // namespace topicstream
