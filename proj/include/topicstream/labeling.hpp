#pragma once

// Topic interpretation: phrase labels, representative posts weighted by the
// engagement-based quality score, and PMI topic coherence.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "topicstream/matrix.hpp"
#include "topicstream/preprocess.hpp"

namespace topicstream {

struct SliceResult;

// exp(-1 / (ln(v+1) ln(r+1)) - eta / ln(h+1)) with natural logs. Negative
// votes are clamped to zero; any zero logarithm yields the limit value 0.
double QualityScore(std::int64_t votes, std::int64_t views,
                    std::int64_t length_tokens, double eta);

struct RankedPhrase {
  int id = 0;
  std::string token;
  double weight = 0.0;
};

struct PhraseRanking {
  std::vector<RankedPhrase> phrases;
  bool short_list = false;  // fewer than top_n phrases exist
};

// Phrase entries of the vocabulary by descending weight; ties by lower id.
PhraseRanking RankPhrases(std::span<const double> phi_row,
                          const Vocabulary& vocab, std::size_t top_n);

// Top-n vocabulary ids by descending weight; ties by lower id.
std::vector<int> TopWords(std::span<const double> phi_row, std::size_t n);

struct RankedPost {
  std::size_t doc = 0;  // row in theta
  std::string post_id;
  double score = 0.0;   // theta_dk * quality
};

// Rows of `theta` ranked by theta(d, topic) * quality[d]; ties by post id.
// Zero-score posts are never returned.
std::vector<RankedPost> RepresentativePosts(
    std::size_t topic, const RealMatrix& theta, std::span<const double> quality,
    std::span<const std::string> post_ids, std::size_t top_m);

// Document-level occurrence index for coherence.
class CooccurrenceIndex {
 public:
  CooccurrenceIndex() = default;
  CooccurrenceIndex(std::span<const ProcessedDoc> docs, std::size_t vocab_size);

  std::size_t document_count() const { return document_count_; }
  long long DocumentFrequency(int word) const;
  long long PairDocumentFrequency(int a, int b) const;

 private:
  std::size_t document_count_ = 0;
  std::vector<std::vector<int>> postings_;  // sorted doc ids per word
};

// Sum over i < j of ln(p(wi,wj) / (p(wi) p(wj))) with document co-occurrence,
// add-one smoothing on pair counts, and a floor of one on word counts.
double TopicCoherence(std::span<const int> top_words,
                      const CooccurrenceIndex& index);

struct CoherenceSummary {
  double mean = 0.0;
  double standard_error = 0.0;  // sample stdev / sqrt(n)
  std::size_t count = 0;
};

CoherenceSummary SummarizeCoherence(std::span<const double> values);

struct LabelOptions {
  std::size_t top_n = 10;        // phrases per topic
  std::size_t top_m = 3;         // representative posts
  std::size_t coherence_n = 10;  // words in the coherence sum
  double eta = 0.1;
};

struct TopicLabelBundle {
  int topic = 0;
  std::vector<RankedPhrase> phrases;
  bool phrases_short = false;
  std::vector<RankedPost> posts;
  double coherence = 0.0;
};

// Everything needed to label a slice; all spans index the global document
// list used by the stream.
struct LabelContext {
  const Vocabulary* vocab = nullptr;
  const CooccurrenceIndex* cooccurrence = nullptr;
  std::span<const ProcessedDoc> docs;
  std::span<const double> quality;
  LabelOptions options;
};

// `doc_indices` maps theta rows to global documents.
std::vector<TopicLabelBundle> LabelSlice(const RealMatrix& phi,
                                         const RealMatrix& theta,
                                         std::span<const std::size_t> doc_indices,
                                         const LabelContext& context);

// Mean coherence over every topic of every trained slice, using the top
// `n` words of each topic.
CoherenceSummary CoherenceReport(const std::vector<SliceResult>& results,
                                 std::size_t n, const CooccurrenceIndex& index);

}  // namespace topicstream
