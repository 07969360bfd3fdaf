#pragma once

// Synthetic time-sliced corpora drawn from LDA with block-structured topics,
// optional per-slice drift, and one injected topic replacement.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "topicstream/corpus.hpp"
#include "topicstream/matrix.hpp"
#include "topicstream/preprocess.hpp"

namespace topicstream {

struct SynthParams {
  std::size_t topics = 10;
  std::size_t vocab_size = 220;
  std::size_t docs_per_slice = 200;
  std::size_t doc_length = 50;
  std::size_t slices = 6;
  int shift_slice = 3;  // negative disables the shift
  int shift_topic = 0;
  double shift_magnitude = 1.0;  // 0 = no shift, 1 = full replacement
  double doc_alpha = 0.5;        // document-topic Dirichlet concentration
  double block_concentration = 5.0;
  double leak = 0.05;            // mass spread uniformly over the vocabulary
  double drift = 0.0;            // log-scale random walk per slice
  std::uint64_t seed = 1;
  Period start{2017, 1};

  // Throws Error(kValidation) on inconsistent parameters.
  void Validate() const;
  bool HasShift() const { return shift_slice >= 0 && shift_magnitude > 0.0; }
};

struct SynthCorpus {
  SynthParams params;
  std::vector<std::string> words;  // id -> pseudo-word
  // Per slice, the generating K x V topic-word matrix.
  std::vector<RealMatrix> true_topics;
  // Global document list; token ids index `words`.
  std::vector<ProcessedDoc> docs;
  std::vector<std::vector<std::size_t>> slice_docs;
  std::vector<std::string> period_labels;
  std::vector<Post> posts;  // one per doc, same order
};

SynthCorpus GenerateSynthetic(const SynthParams& params);

// Ground-truth sidecar: shift slice/topic (or no_shift) and the generating
// topic matrices.
nlohmann::json GroundTruthJson(const SynthCorpus& corpus);

// Pseudo-words stable under normalization and lemmatization.
std::string SyntheticWord(std::size_t index);

// Vocabulary whose ids coincide with the generator's word ids.
Vocabulary SyntheticVocabulary(const SynthCorpus& corpus);

}  // namespace topicstream
