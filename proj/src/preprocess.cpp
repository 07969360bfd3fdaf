#include "topicstream/preprocess.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "topicstream/corpus.hpp"
#include "topicstream/error.hpp"

namespace topicstream {

namespace {

constexpr char kCodeSentinel = '\x01';

bool StartsWithNoCase(std::string_view s, std::size_t pos,
                      std::string_view prefix) {
  if (pos + prefix.size() > s.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[pos + i])) != prefix[i]) {
      return false;
    }
  }
  return true;
}

std::size_t FindNoCase(std::string_view s, std::string_view needle,
                       std::size_t from) {
  for (std::size_t i = from; i + needle.size() <= s.size(); ++i) {
    if (StartsWithNoCase(s, i, needle)) return i;
  }
  return std::string_view::npos;
}

bool IsAsciiAlpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}
bool IsDigit(char c) { return c >= '0' && c <= '9'; }
bool IsHighByte(char c) { return static_cast<unsigned char>(c) >= 0x80; }

// Replaces code blocks with a sentinel, drops other tags and decodes the
// handful of HTML entities that show up in post bodies.
std::string StripMarkup(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '<' && i + 1 < text.size() &&
        (IsAsciiAlpha(text[i + 1]) || text[i + 1] == '/' ||
         text[i + 1] == '!')) {
      const bool pre = StartsWithNoCase(text, i, "<pre") &&
                       (i + 4 < text.size() &&
                        (text[i + 4] == '>' || text[i + 4] == ' '));
      const bool code = StartsWithNoCase(text, i, "<code") &&
                        (i + 5 < text.size() &&
                         (text[i + 5] == '>' || text[i + 5] == ' '));
      if (pre || code) {
        const auto close = FindNoCase(text, pre ? "</pre>" : "</code>", i);
        out.push_back(' ');
        out.push_back(kCodeSentinel);
        out.push_back(' ');
        if (close == std::string_view::npos) return out;
        i = close + (pre ? 5 : 6);
        continue;
      }
      const auto end = text.find('>', i);
      if (end != std::string_view::npos) {
        out.push_back(' ');
        i = end;
        continue;
      }
    }
    if (c == '&') {
      static constexpr std::pair<std::string_view, char> kEntities[] = {
          {"&amp;", '&'},  {"&lt;", '<'},  {"&gt;", '>'},   {"&quot;", '"'},
          {"&#39;", '\''}, {"&apos;", '\''}, {"&nbsp;", ' '},
      };
      bool matched = false;
      for (const auto& [name, ch] : kEntities) {
        if (text.substr(i, name.size()) == name) {
          out.push_back(ch);
          i += name.size() - 1;
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }
    out.push_back(c);
  }
  return out;
}

bool IsUrl(std::string_view chunk) {
  return chunk.starts_with("http://") || chunk.starts_with("https://") ||
         chunk.starts_with("ftp://") || chunk.starts_with("www.");
}

void AppendToken(std::string& out, std::string_view token) {
  if (!out.empty()) out.push_back(' ');
  out.append(token);
}

// Splits a lowercased whitespace-free chunk into word pieces.
void EmitPieces(std::string& out, std::string_view chunk) {
  auto word_char = [&](std::size_t i) {
    const char c = chunk[i];
    if (IsAsciiAlpha(c) || IsDigit(c) || c == '+' || c == '#' ||
        IsHighByte(c)) {
      return true;
    }
    const bool between_digits = i > 0 && i + 1 < chunk.size() &&
                                IsDigit(chunk[i - 1]) && IsDigit(chunk[i + 1]);
    const bool between_letters = i > 0 && i + 1 < chunk.size() &&
                                 IsAsciiAlpha(chunk[i - 1]) &&
                                 IsAsciiAlpha(chunk[i + 1]);
    return ((c == '.' || c == ',') && between_digits) ||
           (c == '\'' && between_letters);
  };
  std::size_t i = 0;
  while (i < chunk.size()) {
    if (!word_char(i)) {
      ++i;
      continue;
    }
    std::string piece;
    bool has_alnum = false;
    bool numeric = true;
    for (; i < chunk.size() && word_char(i); ++i) {
      const char c = chunk[i];
      if (c == '\'') continue;
      piece.push_back(c);
      if (IsAsciiAlpha(c) || IsDigit(c) || IsHighByte(c)) has_alnum = true;
      if (!IsDigit(c) && c != '.' && c != ',') numeric = false;
    }
    if (!has_alnum) continue;
    AppendToken(out, numeric ? kNumToken : std::string_view(piece));
  }
}

bool HasVowel(std::string_view s) {
  return s.find_first_of("aeiouy") != std::string_view::npos;
}

bool IsVowelAt(std::string_view s, std::size_t i) {
  const char c = s[i];
  if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u') return true;
  return c == 'y' && i > 0 && !IsVowelAt(s, i - 1);
}

// Porter's measure: number of vowel-consonant sequences.
int Measure(std::string_view s) {
  int m = 0;
  bool prev_vowel = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool v = IsVowelAt(s, i);
    if (prev_vowel && !v) ++m;
    prev_vowel = v;
  }
  return m;
}

bool EndsCvc(std::string_view s) {
  const auto n = s.size();
  if (n < 3) return false;
  const char last = s[n - 1];
  return !IsVowelAt(s, n - 3) && IsVowelAt(s, n - 2) && !IsVowelAt(s, n - 1) &&
         last != 'w' && last != 'x' && last != 'y';
}

// Repairs a stem left by removing -ing/-ed.
std::string RepairStem(std::string stem) {
  const auto n = stem.size();
  if (n >= 4 && stem[n - 1] == stem[n - 2] && !IsVowelAt(stem, n - 1) &&
      stem[n - 1] != 'l' && stem[n - 1] != 's' && stem[n - 1] != 'z') {
    stem.pop_back();
    return stem;
  }
  for (std::string_view suffix : {"at", "bl", "iz", "ur", "ut", "uc", "anc",
                                  "enc", "v"}) {
    if (stem.ends_with(suffix)) return stem + "e";
  }
  if (Measure(stem) == 1 && EndsCvc(stem)) return stem + "e";
  return stem;
}

// Gerunds that name things in this domain; never reduced to a verb.
const std::unordered_set<std::string_view>& NounGerunds() {
  static const std::unordered_set<std::string_view> kWords = {
      "learning",   "training",   "embedding",  "padding",     "pooling",
      "encoding",   "decoding",   "clustering", "programming", "processing",
      "computing",  "networking", "reasoning",  "mapping",     "sampling",
      "boosting",   "bagging",    "modeling",   "modelling",   "engineering",
      "rendering",  "scheduling", "understanding", "meaning",  "building",
      "setting",    "beginning",  "something",  "nothing",     "anything",
      "everything", "during",     "morning",    "evening",     "string",
      "testing",    "tuning",     "labeling",   "labelling",   "parsing",
      "hashing",    "spring",     "thing",      "king",        "ring",
      "bring",      "ceiling",    "feeling",    "routing",     "tracking",
      "forecasting", "planning",  "pricing",    "driving",     "gaming",
      "indexing",   "matching",   "ranking",    "smoothing",   "filtering",
      "mining",     "writing",    "reading",    "wording",     "lighting",
      "weighting",  "heading",    "finding",    "painting",
  };
  return kWords;
}

// Plural-looking words that are already base forms.
const std::unordered_set<std::string_view>& SingularS() {
  static const std::unordered_set<std::string_view> kWords = {
      "bias",  "alias", "canvas", "atlas", "keras", "pandas", "whereas",
      "alas",  "ios",   "macos",  "chaos", "kudos", "cos",    "series",
      "species", "news", "lens",  "always", "perhaps", "physics",
      "mathematics", "statistics", "economics", "robotics", "analytics",
      "linguistics", "genetics", "graphics", "semantics", "dynamics",
      "ethics", "logistics",
  };
  return kWords;
}

}  // namespace

std::string Normalize(std::string_view text) {
  const std::string stripped = StripMarkup(text);
  std::string out;
  out.reserve(stripped.size());
  std::size_t i = 0;
  while (i < stripped.size()) {
    while (i < stripped.size() &&
           std::isspace(static_cast<unsigned char>(stripped[i]))) {
      ++i;
    }
    const auto start = i;
    while (i < stripped.size() &&
           !std::isspace(static_cast<unsigned char>(stripped[i]))) {
      ++i;
    }
    if (start == i) break;
    std::string chunk(stripped.substr(start, i - start));
    if (chunk.size() == 1 && chunk[0] == kCodeSentinel) {
      AppendToken(out, kCodeToken);
      continue;
    }
    for (char& c : chunk) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    const auto lead = chunk.find_first_not_of("([{\"'<");
    if (lead != std::string::npos && IsUrl(std::string_view(chunk).substr(lead))) {
      AppendToken(out, kUrlToken);
      continue;
    }
    EmitPieces(out, chunk);
  }
  return out;
}

std::vector<std::string> Tokenize(std::string_view normalized) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < normalized.size()) {
    const auto end = normalized.find(' ', i);
    const auto stop = end == std::string_view::npos ? normalized.size() : end;
    if (stop > i) tokens.emplace_back(normalized.substr(i, stop - i));
    i = stop + 1;
  }
  return tokens;
}

RuleLemmatizer::RuleLemmatizer() {
  irregular_ = {
      {"men", "man"},           {"women", "woman"},
      {"children", "child"},    {"mice", "mouse"},
      {"feet", "foot"},         {"teeth", "tooth"},
      {"geese", "goose"},       {"criteria", "criterion"},
      {"phenomena", "phenomenon"}, {"indices", "index"},
      {"matrices", "matrix"},   {"vertices", "vertex"},
      {"analyses", "analysis"}, {"hypotheses", "hypothesis"},
      {"axes", "axis"},         {"caches", "cache"},
      {"went", "go"},           {"gone", "go"},
      {"goes", "go"},           {"did", "do"},
      {"done", "do"},           {"does", "do"},
      {"had", "have"},          {"has", "have"},
      {"having", "have"},       {"made", "make"},
      {"got", "get"},           {"gotten", "get"},
      {"took", "take"},         {"taken", "take"},
      {"gave", "give"},         {"given", "give"},
      {"saw", "see"},           {"seen", "see"},
      {"knew", "know"},         {"known", "know"},
      {"thought", "think"},     {"found", "find"},
      {"ran", "run"},           {"running", "run"},
      {"wrote", "write"},       {"written", "write"},
      {"chose", "choose"},      {"chosen", "choose"},
      {"began", "begin"},       {"begun", "begin"},
      {"built", "build"},       {"taught", "teach"},
      {"brought", "bring"},     {"bought", "buy"},
      {"caught", "catch"},      {"held", "hold"},
      {"kept", "keep"},         {"meant", "mean"},
      {"sent", "send"},         {"spent", "spend"},
      {"understood", "understand"}, {"fed", "feed"},
      {"led", "lead"},          {"lost", "lose"},
      {"paid", "pay"},          {"said", "say"},
      {"told", "tell"},         {"used", "use"},
      {"using", "use"},         {"uses", "use"},
      {"caused", "cause"},      {"causing", "cause"},
      {"changing", "change"},   {"changed", "change"},
      {"computed", "compute"},  {"trained", "train"},
      {"lying", "lie"},         {"dying", "die"},
      {"tying", "tie"},         {"data", "data"},
      {"people", "people"},
  };
}

std::string RuleLemmatizer::Lemmatize(std::string_view token) const {
  std::string t(token);
  if (t.empty() ||
      !std::all_of(t.begin(), t.end(), [](char c) { return c >= 'a' && c <= 'z'; })) {
    return t;
  }
  if (auto it = irregular_.find(t); it != irregular_.end()) return it->second;
  if (t.size() <= 3) return t;

  if (t.ends_with("s")) {
    if (SingularS().contains(t)) return t;
    if (t.ends_with("ies") && t.size() > 4) return t.substr(0, t.size() - 3) + "y";
    if (t.ends_with("sses")) return t.substr(0, t.size() - 2);
    for (std::string_view es : {"ches", "shes", "xes", "zes"}) {
      if (t.ends_with(es)) return t.substr(0, t.size() - 2);
    }
    if (t.ends_with("ss") || t.ends_with("us") || t.ends_with("is")) return t;
    return t.substr(0, t.size() - 1);
  }
  if (t.ends_with("ing")) {
    if (NounGerunds().contains(t)) return t;
    const std::string stem = t.substr(0, t.size() - 3);
    if (stem.size() < 3 || !HasVowel(stem)) return t;
    return RepairStem(stem);
  }
  if (t.ends_with("ed")) {
    if (t.ends_with("eed")) return t;
    if (t.ends_with("ied") && t.size() > 4) return t.substr(0, t.size() - 3) + "y";
    const std::string stem = t.substr(0, t.size() - 2);
    if (stem.size() < 3 || !HasVowel(stem)) return t;
    return RepairStem(stem);
  }
  return t;
}

StopwordList StopwordList::Parse(std::istream& in) {
  std::set<std::string, std::less<>> words;
  std::string line;
  while (std::getline(in, line)) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    const auto e = line.find_last_not_of(" \t\r");
    std::string word = line.substr(b, e - b + 1);
    for (char& c : word) {
      c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    words.insert(std::move(word));
  }
  return StopwordList(std::move(words));
}

StopwordList StopwordList::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword file '" + path.string() + "'");
  return Parse(in);
}

double Pmi(long long count_ij, long long count_i, long long count_j,
           long long total_tokens, long long total_pairs) {
  const double p_ij = static_cast<double>(count_ij) / total_pairs;
  const double p_i = static_cast<double>(count_i) / total_tokens;
  const double p_j = static_cast<double>(count_j) / total_tokens;
  return std::log(p_ij / (p_i * p_j));
}

std::string JoinPhrase(std::string_view first, std::string_view second) {
  std::string out;
  out.reserve(first.size() + second.size() + 1);
  out.append(first);
  out.push_back('_');
  out.append(second);
  return out;
}

bool PhraseTable::Contains(std::string_view first,
                           std::string_view second) const {
  return phrases.find(JoinPhrase(first, second)) != phrases.end();
}

PhraseTable ExtractPhrases(const TokenDocs& docs, const PhraseOptions& options) {
  PhraseTable table;
  auto candidate = [&](const std::string& tok) {
    if (tok.empty() || tok.front() == '<') return false;
    if (tok.find('_') != std::string::npos) return false;
    return options.stopwords == nullptr || !options.stopwords->Contains(tok);
  };
  std::map<std::pair<std::string, std::string>, long long> pairs;
  for (const auto& doc : docs) {
    for (const auto& tok : doc) ++table.unigram_counts[tok];
    table.total_tokens += static_cast<long long>(doc.size());
    if (doc.size() >= 2) {
      table.total_pairs += static_cast<long long>(doc.size() - 1);
    }
    for (std::size_t i = 0; i + 1 < doc.size(); ++i) {
      if (candidate(doc[i]) && candidate(doc[i + 1])) {
        ++pairs[{doc[i], doc[i + 1]}];
      }
    }
  }
  for (const auto& [key, count] : pairs) {
    if (count < options.min_count) continue;
    const double score =
        Pmi(count, table.unigram_counts.at(key.first),
            table.unigram_counts.at(key.second), table.total_tokens,
            table.total_pairs);
    if (!(score > options.pmi_threshold)) continue;
    table.phrases.emplace(JoinPhrase(key.first, key.second),
                          PhraseEntry{key.first, key.second, count, score});
  }
  return table;
}

std::vector<std::string> ApplyPhrases(const PhraseTable& table,
                                      const std::vector<std::string>& doc) {
  std::vector<std::string> out;
  out.reserve(doc.size());
  std::size_t i = 0;
  while (i < doc.size()) {
    if (i + 1 < doc.size()) {
      std::string fused = JoinPhrase(doc[i], doc[i + 1]);
      if (table.phrases.find(fused) != table.phrases.end()) {
        out.push_back(std::move(fused));
        i += 2;
        continue;
      }
    }
    out.push_back(doc[i]);
    ++i;
  }
  return out;
}

TokenDocs ApplyPhrases(const PhraseTable& table, const TokenDocs& docs) {
  TokenDocs out;
  out.reserve(docs.size());
  for (const auto& doc : docs) out.push_back(ApplyPhrases(table, doc));
  return out;
}

std::optional<int> Vocabulary::Find(std::string_view token) const {
  auto it = token_to_id.find(std::string(token));
  if (it == token_to_id.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::Add(const std::string& token, int df) {
  if (auto it = token_to_id.find(token); it != token_to_id.end()) {
    return it->second;
  }
  const int id = static_cast<int>(id_to_token.size());
  token_to_id.emplace(token, id);
  id_to_token.push_back(token);
  is_phrase.push_back(token.find('_') != std::string::npos);
  document_frequency.push_back(df);
  return id;
}

IndexedCorpus FilterAndIndex(const std::vector<NamedTokens>& docs,
                             const StopwordList& stopwords,
                             const IndexOptions& options) {
  auto keep = [&](const std::string& tok) {
    return tok.size() >= options.min_token_length && tok.front() != '<' &&
           !stopwords.Contains(tok);
  };
  std::unordered_map<std::string, int> df;
  for (const auto& doc : docs) {
    std::unordered_set<std::string_view> seen;
    for (const auto& tok : doc.tokens) {
      if (keep(tok) && seen.insert(tok).second) ++df[tok];
    }
  }
  IndexedCorpus out;
  out.docs.reserve(docs.size());
  for (const auto& doc : docs) {
    ProcessedDoc pd{doc.post_id, {}};
    for (const auto& tok : doc.tokens) {
      if (!keep(tok)) continue;
      const int freq = df.at(tok);
      if (freq < options.min_document_frequency) continue;
      pd.token_ids.push_back(out.vocab.Add(tok, freq));
    }
    if (pd.token_ids.empty()) out.empty_docs.push_back(out.docs.size());
    out.docs.push_back(std::move(pd));
  }
  if (out.vocab.size() == 0) {
    throw ValidationError(
        "preprocess: vocabulary is empty after filtering (check stopwords and "
        "min_document_frequency)");
  }
  return out;
}

void WriteVocabularyTsv(std::ostream& out, const Vocabulary& vocab) {
  out << "id\ttoken\tis_phrase\tdocument_frequency\n";
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    out << i << '\t' << vocab.id_to_token[i] << '\t'
        << (vocab.is_phrase[i] ? 1 : 0) << '\t' << vocab.document_frequency[i]
        << '\n';
  }
}

PreprocessResult Preprocess(const std::vector<Post>& posts,
                            const StopwordList& stopwords,
                            const Lemmatizer& lemmatizer,
                            PreprocessOptions options) {
  TokenDocs token_docs;
  token_docs.reserve(posts.size());
  for (const auto& post : posts) {
    auto tokens = Tokenize(Normalize(post.Text()));
    for (auto& tok : tokens) {
      // Stopwords keep their surface form so the filter still sees them.
      if (!stopwords.Contains(tok)) tok = lemmatizer.Lemmatize(tok);
    }
    token_docs.push_back(std::move(tokens));
  }
  options.phrases.stopwords = &stopwords;
  PreprocessResult result;
  result.phrase_table = ExtractPhrases(token_docs, options.phrases);
  result.fused.reserve(posts.size());
  for (std::size_t i = 0; i < posts.size(); ++i) {
    result.fused.push_back(
        {posts[i].id, ApplyPhrases(result.phrase_table, token_docs[i])});
  }
  result.corpus = FilterAndIndex(result.fused, stopwords, options.index);
  return result;
}

}  // namespace topicstream
