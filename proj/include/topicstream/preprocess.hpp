#pragma once

// Text normalization, lemmatization, PMI phrase mining and vocabulary
// construction. The output (Vocabulary + ProcessedDoc list) is global across
// all time slices so every topic-word matrix shares one column space.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace topicstream {

struct Post;

inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kCodeToken = "<code>";
inline constexpr std::string_view kNumToken = "<num>";

// Lowercases, replaces code blocks/URLs/numbers with placeholder tokens,
// strips markup and punctuation, and collapses whitespace to single spaces.
std::string Normalize(std::string_view text);

// Splits normalized text on spaces.
std::vector<std::string> Tokenize(std::string_view normalized);

class Lemmatizer {
 public:
  virtual ~Lemmatizer() = default;
  virtual std::string Lemmatize(std::string_view token) const = 0;
};

// Irregular-form table followed by suffix rules: plural -s/-es/-ies,
// -ing/-ed with consonant undoubling and silent-e restoration.
class RuleLemmatizer final : public Lemmatizer {
 public:
  RuleLemmatizer();
  std::string Lemmatize(std::string_view token) const override;

 private:
  std::unordered_map<std::string, std::string> irregular_;
};

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::set<std::string, std::less<>> words)
      : words_(std::move(words)) {}

  // Bundled English list plus common chat abbreviations and filler words.
  static StopwordList Default();
  // One token per line; '#' starts a comment. Throws Error(kIo).
  static StopwordList Load(const std::filesystem::path& path);
  static StopwordList Parse(std::istream& in);

  bool Contains(std::string_view token) const {
    return words_.find(token) != words_.end();
  }
  std::size_t size() const { return words_.size(); }

 private:
  std::set<std::string, std::less<>> words_;
};

// Pointwise mutual information with natural log. Unigram probabilities are
// count/total_tokens, the pair probability is count_ij/total_pairs. All counts
// must be positive.
double Pmi(long long count_ij, long long count_i, long long count_j,
           long long total_tokens, long long total_pairs);
inline double Pmi(long long count_ij, long long count_i, long long count_j,
                  long long total) {
  return Pmi(count_ij, count_i, count_j, total, total);
}

std::string JoinPhrase(std::string_view first, std::string_view second);

struct PhraseEntry {
  std::string first;
  std::string second;
  long long count = 0;
  double pmi = 0.0;
};

struct PhraseTable {
  // Keyed by the fused "first_second" token.
  std::map<std::string, PhraseEntry, std::less<>> phrases;
  std::unordered_map<std::string, long long> unigram_counts;
  long long total_tokens = 0;
  long long total_pairs = 0;

  bool Contains(std::string_view first, std::string_view second) const;
};

struct PhraseOptions {
  double pmi_threshold = 1.0;
  long long min_count = 5;
  // Bigrams touching a stopword or placeholder token are never candidates.
  const StopwordList* stopwords = nullptr;
};

using TokenDocs = std::vector<std::vector<std::string>>;

// Keeps adjacent bigrams with count >= min_count and PMI > pmi_threshold.
PhraseTable ExtractPhrases(const TokenDocs& docs, const PhraseOptions& options);

// Greedy left-to-right fusion of retained bigrams; constituents are consumed.
std::vector<std::string> ApplyPhrases(const PhraseTable& table,
                                      const std::vector<std::string>& doc);
TokenDocs ApplyPhrases(const PhraseTable& table, const TokenDocs& docs);

struct Vocabulary {
  std::unordered_map<std::string, int> token_to_id;
  std::vector<std::string> id_to_token;
  std::vector<bool> is_phrase;
  std::vector<int> document_frequency;

  std::size_t size() const { return id_to_token.size(); }
  std::optional<int> Find(std::string_view token) const;
  // Appends a token if absent and returns its id.
  int Add(const std::string& token, int document_frequency = 0);
};

struct ProcessedDoc {
  std::string post_id;
  std::vector<int> token_ids;

  std::size_t length() const { return token_ids.size(); }
};

struct IndexOptions {
  std::size_t min_token_length = 2;
  int min_document_frequency = 2;
};

struct IndexedCorpus {
  Vocabulary vocab;
  std::vector<ProcessedDoc> docs;
  // Positions in `docs` of documents left with no tokens.
  std::vector<std::size_t> empty_docs;
};

struct NamedTokens {
  std::string post_id;
  std::vector<std::string> tokens;
};

// Removes stopwords, placeholders, short tokens and rare tokens, then assigns
// dense ids in order of first occurrence. Throws Error(kValidation) when the
// vocabulary ends up empty.
IndexedCorpus FilterAndIndex(const std::vector<NamedTokens>& docs,
                             const StopwordList& stopwords,
                             const IndexOptions& options = {});

// TSV: id, token, is_phrase, document_frequency.
void WriteVocabularyTsv(std::ostream& out, const Vocabulary& vocab);

struct PreprocessOptions {
  PhraseOptions phrases;
  IndexOptions index;
};

struct PreprocessResult {
  PhraseTable phrase_table;
  IndexedCorpus corpus;
  // Token sequences after phrase fusion (before filtering), one per post.
  std::vector<NamedTokens> fused;
};

// normalize -> tokenize -> lemmatize -> phrase mining -> filter and index,
// over the whole corpus at once.
PreprocessResult Preprocess(const std::vector<Post>& posts,
                            const StopwordList& stopwords,
                            const Lemmatizer& lemmatizer,
                            PreprocessOptions options);

}  // namespace topicstream
