#include "topicstream/synth.hpp"

#include <cmath>

#include "topicstream/error.hpp"
#include "topicstream/random.hpp"

namespace topicstream {

using nlohmann::json;

namespace {

void Normalize(std::span<double> row) {
  double total = 0.0;
  for (double x : row) total += x;
  for (double& x : row) x /= total;
}

// Block-concentrated distribution: (1 - leak) on the block, leak uniform.
std::vector<double> BlockTopic(const std::vector<double>& block_weights,
                               std::size_t block_start, std::size_t vocab,
                               double leak) {
  std::vector<double> row(vocab, leak / static_cast<double>(vocab));
  for (std::size_t i = 0; i < block_weights.size(); ++i) {
    row[block_start + i] += (1.0 - leak) * block_weights[i];
  }
  return row;
}

}  // namespace

void SynthParams::Validate() const {
  if (topics < 2) throw ValidationError("synth: topics must be >= 2");
  if (slices < 1) throw ValidationError("synth: slices must be >= 1");
  if (docs_per_slice < 1 || doc_length < 1) {
    throw ValidationError("synth: docs_per_slice and doc_length must be >= 1");
  }
  const std::size_t blocks = topics + (HasShift() ? 1 : 0);
  if (vocab_size < 2 * blocks) {
    throw ValidationError("synth: vocab_size too small for the topic blocks");
  }
  if (shift_slice >= static_cast<int>(slices)) {
    throw ValidationError("synth: shift_slice beyond the last slice");
  }
  if (shift_slice == 0) {
    throw ValidationError("synth: shift_slice must leave a preceding slice");
  }
  if (shift_topic < 0 || shift_topic >= static_cast<int>(topics)) {
    throw ValidationError("synth: shift_topic out of range");
  }
  if (!(shift_magnitude >= 0.0 && shift_magnitude <= 1.0)) {
    throw ValidationError("synth: shift_magnitude must lie in [0, 1]");
  }
  if (!(doc_alpha > 0.0) || !(block_concentration > 0.0)) {
    throw ValidationError("synth: concentrations must be positive");
  }
  if (!(leak >= 0.0 && leak < 1.0) || !(drift >= 0.0)) {
    throw ValidationError("synth: leak must lie in [0, 1) and drift >= 0");
  }
}

std::string SyntheticWord(std::size_t index) {
  // Consonant-vowel syllables; never ends in 's' or 'e' and never forms a
  // suffix the lemmatizer strips.
  static constexpr char kConsonants[] = "bdfgklmnprtvz";
  static constexpr char kVowels[] = "aiou";
  constexpr std::size_t kSyllables = 13 * 4;
  std::string word;
  std::size_t x = index;
  for (int i = 0; i < 3; ++i) {
    const std::size_t syl = x % kSyllables;
    x /= kSyllables;
    word.push_back(kConsonants[syl / 4]);
    word.push_back(kVowels[syl % 4]);
  }
  if (x > 0) word += SyntheticWord(x - 1);
  return word;
}

SynthCorpus GenerateSynthetic(const SynthParams& params) {
  params.Validate();
  SynthCorpus out;
  out.params = params;
  Rng rng(params.seed);

  const std::size_t k_topics = params.topics;
  const std::size_t vocab = params.vocab_size;
  const std::size_t blocks = k_topics + (params.HasShift() ? 1 : 0);
  const std::size_t block_size = vocab / blocks;

  out.words.reserve(vocab);
  for (std::size_t i = 0; i < vocab; ++i) out.words.push_back(SyntheticWord(i));

  std::vector<std::vector<double>> block_weights(blocks);
  for (auto& w : block_weights) {
    w = SymmetricDirichlet(rng, block_size, params.block_concentration);
  }

  Period period = params.start;
  for (std::size_t t = 0; t < params.slices; ++t) {
    if (t > 0 && params.drift > 0.0) {
      for (auto& w : block_weights) {
        for (double& x : w) x *= std::exp(params.drift * StandardNormal(rng));
        Normalize(w);
      }
    }
    RealMatrix topics(k_topics, vocab);
    for (std::size_t k = 0; k < k_topics; ++k) {
      auto row = BlockTopic(block_weights[k], k * block_size, vocab, params.leak);
      if (params.HasShift() && static_cast<int>(t) >= params.shift_slice &&
          static_cast<int>(k) == params.shift_topic) {
        const auto emerging = BlockTopic(block_weights[k_topics],
                                         k_topics * block_size, vocab, params.leak);
        for (std::size_t w = 0; w < vocab; ++w) {
          row[w] = (1.0 - params.shift_magnitude) * row[w] +
                   params.shift_magnitude * emerging[w];
        }
      }
      std::copy(row.begin(), row.end(), topics.row(k).begin());
    }

    std::vector<std::size_t> ids;
    for (std::size_t d = 0; d < params.docs_per_slice; ++d) {
      const auto theta = SymmetricDirichlet(rng, k_topics, params.doc_alpha);
      ProcessedDoc doc;
      doc.post_id = "s" + std::to_string(t) + "-d" + std::to_string(d);
      doc.token_ids.reserve(params.doc_length);
      std::string text;
      for (std::size_t i = 0; i < params.doc_length; ++i) {
        const auto k = Categorical(rng, theta);
        const auto w = Categorical(rng, topics.row(k));
        doc.token_ids.push_back(static_cast<int>(w));
        if (!text.empty()) text.push_back(' ');
        text += out.words[w];
      }
      Post post;
      post.id = doc.post_id;
      post.created_at =
          std::chrono::sys_days{std::chrono::year{period.year} /
                                std::chrono::month{static_cast<unsigned>(period.month)} /
                                std::chrono::day{static_cast<unsigned>(1 + d % 28)}} +
          std::chrono::hours{12};
      post.body = std::move(text);
      post.votes = static_cast<std::int64_t>(UniformIndex(rng, 40));
      post.views = 10 + static_cast<std::int64_t>(UniformIndex(rng, 5000));
      ids.push_back(out.docs.size());
      out.docs.push_back(std::move(doc));
      out.posts.push_back(std::move(post));
    }
    out.slice_docs.push_back(std::move(ids));
    out.period_labels.push_back(period.Label());
    out.true_topics.push_back(std::move(topics));
    period = period.Next();
  }
  return out;
}

json GroundTruthJson(const SynthCorpus& corpus) {
  const auto& p = corpus.params;
  json j;
  j["no_shift"] = !p.HasShift();
  if (p.HasShift()) {
    j["shift_slice"] = p.shift_slice;
    j["shift_topic"] = p.shift_topic;
    j["shift_magnitude"] = p.shift_magnitude;
  } else {
    j["shift_slice"] = nullptr;
    j["shift_topic"] = nullptr;
  }
  j["params"] = {{"topics", p.topics},
                 {"vocab_size", p.vocab_size},
                 {"docs_per_slice", p.docs_per_slice},
                 {"doc_length", p.doc_length},
                 {"slices", p.slices},
                 {"doc_alpha", p.doc_alpha},
                 {"block_concentration", p.block_concentration},
                 {"leak", p.leak},
                 {"drift", p.drift},
                 {"seed", p.seed},
                 {"start", p.start.Label()}};
  j["periods"] = corpus.period_labels;
  j["words"] = corpus.words;
  json topics = json::array();
  for (const auto& m : corpus.true_topics) {
    json rows = json::array();
    for (std::size_t k = 0; k < m.rows(); ++k) {
      rows.push_back(std::vector<double>(m.row(k).begin(), m.row(k).end()));
    }
    topics.push_back(std::move(rows));
  }
  j["topics"] = std::move(topics);
  return j;
}

Vocabulary SyntheticVocabulary(const SynthCorpus& corpus) {
  Vocabulary vocab;
  for (const auto& w : corpus.words) vocab.Add(w);
  return vocab;
}

}  // namespace topicstream
