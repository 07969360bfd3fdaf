#include "topicstream/corpus.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_set>

#include "json.hpp"
#include "topicstream/error.hpp"

namespace topicstream {

using nlohmann::json;

namespace {

bool ParseInt(std::string_view s, std::int64_t& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool ParseDigits(std::string_view s, std::size_t pos, std::size_t n, int& out) {
  if (pos + n > s.size()) return false;
  out = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') return false;
    out = out * 10 + (s[i] - '0');
  }
  return true;
}

std::vector<std::string> SplitTags(std::string_view raw) {
  // Accepts "a|b|c", "|a|b|" and the legacy "<a><b>" dump encoding.
  std::vector<std::string> tags;
  std::string cur;
  for (char c : raw) {
    if (c == '|' || c == '<' || c == '>') {
      if (!cur.empty()) tags.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) tags.push_back(std::move(cur));
  return tags;
}

class DuplicateGuard {
 public:
  // Returns false (and records an error) when the id was already seen.
  bool Admit(const std::string& id, std::size_t record, LoadResult& result) {
    if (seen_.insert(id).second) return true;
    result.errors.push_back({record, "duplicate id '" + id + "'"});
    return false;
  }

 private:
  std::unordered_set<std::string> seen_;
};

// ---- JSONL -----------------------------------------------------------------

std::optional<std::string> JsonString(const json& obj, const char* key,
                                      std::string& error) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<std::int64_t>());
  error = std::string("field '") + key + "' is not a string";
  return std::nullopt;
}

bool JsonInt(const json& obj, const char* key, std::int64_t& out,
             std::string& error) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) {
    out = 0;
    return true;
  }
  if (it->is_number_integer()) {
    out = it->get<std::int64_t>();
    return true;
  }
  if (it->is_string() && ParseInt(it->get_ref<const std::string&>(), out)) {
    return true;
  }
  error = std::string("field '") + key + "' is not an integer";
  return false;
}

std::optional<Post> PostFromJson(const json& obj, std::string& error) {
  if (!obj.is_object()) {
    error = "record is not a JSON object";
    return std::nullopt;
  }
  Post post;
  auto id = JsonString(obj, "id", error);
  if (!id || id->empty()) {
    if (error.empty()) error = "missing field 'id'";
    return std::nullopt;
  }
  post.id = std::move(*id);
  auto created = JsonString(obj, "created_at", error);
  if (!created) {
    if (error.empty()) error = "missing field 'created_at'";
    return std::nullopt;
  }
  auto ts = ParseTimestamp(*created);
  if (!ts) {
    error = "unparseable created_at '" + *created + "'";
    return std::nullopt;
  }
  post.created_at = *ts;
  post.title = JsonString(obj, "title", error).value_or("");
  post.body = JsonString(obj, "body", error).value_or("");
  if (!error.empty()) return std::nullopt;
  if (!JsonInt(obj, "votes", post.votes, error)) return std::nullopt;
  if (!JsonInt(obj, "views", post.views, error)) return std::nullopt;
  if (post.views < 0) {
    error = "field 'views' is negative";
    return std::nullopt;
  }
  if (auto it = obj.find("tags"); it != obj.end() && !it->is_null()) {
    if (it->is_array()) {
      for (const auto& t : *it) {
        if (!t.is_string()) {
          error = "field 'tags' must hold strings";
          return std::nullopt;
        }
        post.tags.push_back(t.get<std::string>());
      }
    } else if (it->is_string()) {
      post.tags = SplitTags(it->get<std::string>());
    } else {
      error = "field 'tags' is not an array";
      return std::nullopt;
    }
  }
  return post;
}

// ---- CSV -------------------------------------------------------------------

// Reads one RFC 4180 record; quoted fields may span lines. Returns false at
// end of input.
bool ReadCsvRecord(std::istream& in, std::vector<std::string>& fields,
                   std::size_t& lines_consumed) {
  fields.clear();
  lines_consumed = 0;
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++lines_consumed;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      // swallowed; LF terminates
    } else if (c == '\n') {
      ++lines_consumed;
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  ++lines_consumed;
  return true;
}

// ---- Posts.xml -------------------------------------------------------------

void AppendUtf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::string DecodeXmlEntities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out.push_back(s[i]);
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back('&');
      continue;
    }
    const auto name = s.substr(i + 1, semi - i - 1);
    if (name == "lt") {
      out.push_back('<');
    } else if (name == "gt") {
      out.push_back('>');
    } else if (name == "amp") {
      out.push_back('&');
    } else if (name == "quot") {
      out.push_back('"');
    } else if (name == "apos") {
      out.push_back('\'');
    } else if (!name.empty() && name[0] == '#') {
      std::uint32_t cp = 0;
      const bool hex = name.size() > 1 && (name[1] == 'x' || name[1] == 'X');
      auto digits = name.substr(hex ? 2 : 1);
      auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(),
                                     cp, hex ? 16 : 10);
      if (ec != std::errc() || p != digits.data() + digits.size()) {
        out.push_back('&');
        continue;
      }
      AppendUtf8(out, cp);
    } else {
      out.push_back('&');
      continue;
    }
    i = semi;
  }
  return out;
}

// Parses the attributes of a single <row .../> element.
bool ParseRowAttributes(std::string_view line,
                        std::map<std::string, std::string, std::less<>>& attrs) {
  attrs.clear();
  auto pos = line.find("<row");
  if (pos == std::string_view::npos) return false;
  pos += 4;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size() || line[pos] == '/' || line[pos] == '>') break;
    const auto eq = line.find('=', pos);
    if (eq == std::string_view::npos) return false;
    std::string name(line.substr(pos, eq - pos));
    if (eq + 1 >= line.size()) return false;
    const char quote = line[eq + 1];
    if (quote != '"' && quote != '\'') return false;
    const auto close = line.find(quote, eq + 2);
    if (close == std::string_view::npos) return false;
    attrs[name] = DecodeXmlEntities(line.substr(eq + 2, close - eq - 2));
    pos = close + 1;
  }
  return true;
}

void Accept(std::optional<Post> post, std::string& error, std::size_t record,
            DuplicateGuard& guard, LoadResult& result) {
  if (!post) {
    result.errors.push_back({record, error});
    return;
  }
  if (guard.Admit(post->id, record, result)) {
    result.posts.push_back(std::move(*post));
  }
}

constexpr int DaysInMonth(int y, int m) {
  constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (y % 4 == 0 && y % 100 != 0) || y % 400 == 0;
  return m == 2 && leap ? 29 : kDays[m - 1];
}

}  // namespace

std::string Post::Text() const {
  if (title.empty()) return body;
  if (body.empty()) return title;
  return title + " " + body;
}

std::optional<PostFormat> ParsePostFormat(std::string_view name) {
  if (name == "jsonl") return PostFormat::kJsonl;
  if (name == "csv") return PostFormat::kCsv;
  if (name == "stackexchange_xml" || name == "xml") {
    return PostFormat::kStackExchangeXml;
  }
  return std::nullopt;
}

std::optional<Timestamp> ParseTimestamp(std::string_view s) {
  int y, mo, d, h = 0, mi = 0, sec = 0;
  if (!ParseDigits(s, 0, 4, y) || s.size() < 10 || s[4] != '-' ||
      !ParseDigits(s, 5, 2, mo) || s[7] != '-' || !ParseDigits(s, 8, 2, d)) {
    return std::nullopt;
  }
  std::size_t pos = 10;
  if (pos < s.size()) {
    if (s[pos] != 'T' && s[pos] != 't' && s[pos] != ' ') return std::nullopt;
    if (!ParseDigits(s, pos + 1, 2, h) || pos + 3 >= s.size() ||
        s[pos + 3] != ':' || !ParseDigits(s, pos + 4, 2, mi)) {
      return std::nullopt;
    }
    pos += 6;
    if (pos < s.size() && s[pos] == ':') {
      if (!ParseDigits(s, pos + 1, 2, sec)) return std::nullopt;
      pos += 3;
    }
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      const auto start = pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') ++pos;
      if (pos == start) return std::nullopt;
    }
  }
  int offset_minutes = 0;
  if (pos < s.size()) {
    if (s[pos] == 'Z' || s[pos] == 'z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      int oh, om;
      if (!ParseDigits(s, pos + 1, 2, oh) || pos + 3 >= s.size() ||
          s[pos + 3] != ':' || !ParseDigits(s, pos + 4, 2, om)) {
        return std::nullopt;
      }
      offset_minutes = (oh * 60 + om) * (s[pos] == '-' ? -1 : 1);
      pos += 6;
    } else {
      return std::nullopt;
    }
  }
  if (pos != s.size()) return std::nullopt;
  if (mo < 1 || mo > 12 || d < 1 || d > DaysInMonth(y, mo) || h > 23 ||
      mi > 59 || sec > 60) {
    return std::nullopt;
  }
  using namespace std::chrono;
  const sys_days day = year{y} / month{static_cast<unsigned>(mo)} /
                       std::chrono::day{static_cast<unsigned>(d)};
  return Timestamp{day} + hours{h} + minutes{mi} + seconds{sec} -
         minutes{offset_minutes};
}

std::string FormatTimestamp(Timestamp ts) {
  using namespace std::chrono;
  const auto day = floor<days>(ts);
  const year_month_day ymd{day};
  const hh_mm_ss hms{ts - day};
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02ld:%02ld:%02lldZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()),
                static_cast<long>(hms.minutes().count()),
                static_cast<long long>(hms.seconds().count()));
  return buf;
}

LoadResult ParseJsonl(std::istream& in) {
  LoadResult result;
  DuplicateGuard guard;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::string error;
    std::optional<Post> post;
    try {
      post = PostFromJson(json::parse(line), error);
    } catch (const json::parse_error& e) {
      error = std::string("invalid JSON: ") + e.what();
    }
    Accept(std::move(post), error, lineno, guard, result);
  }
  return result;
}

LoadResult ParseCsv(std::istream& in) {
  LoadResult result;
  DuplicateGuard guard;
  std::vector<std::string> header;
  std::size_t consumed = 0;
  if (!ReadCsvRecord(in, header, consumed)) return result;
  std::map<std::string, std::size_t, std::less<>> column;
  for (std::size_t i = 0; i < header.size(); ++i) column[header[i]] = i;

  std::vector<std::string> fields;
  std::size_t row = 0;
  while (ReadCsvRecord(in, fields, consumed)) {
    ++row;
    if (fields.size() == 1 && fields[0].empty()) continue;
    auto get = [&](std::string_view key) -> const std::string* {
      auto it = column.find(key);
      if (it == column.end() || it->second >= fields.size()) return nullptr;
      return &fields[it->second];
    };
    json obj = json::object();
    for (const char* key : {"id", "created_at", "title", "body"}) {
      if (const auto* v = get(key); v && !v->empty()) obj[key] = *v;
    }
    for (const char* key : {"votes", "views", "tags"}) {
      if (const auto* v = get(key); v && !v->empty()) obj[key] = *v;
    }
    std::string error;
    Accept(PostFromJson(obj, error), error, row, guard, result);
  }
  return result;
}

LoadResult ParseStackExchangeXml(std::istream& in) {
  LoadResult result;
  DuplicateGuard guard;
  std::map<std::string, std::string, std::less<>> attrs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find("<row") == std::string::npos) continue;
    if (!ParseRowAttributes(line, attrs)) {
      result.errors.push_back({lineno, "malformed <row> element"});
      continue;
    }
    if (auto it = attrs.find("PostTypeId");
        it != attrs.end() && it->second != "1") {
      ++result.skipped;
      continue;
    }
    json obj = json::object();
    auto copy = [&](const char* from, const char* to) {
      if (auto it = attrs.find(from); it != attrs.end()) obj[to] = it->second;
    };
    copy("Id", "id");
    copy("CreationDate", "created_at");
    copy("Title", "title");
    copy("Body", "body");
    copy("Score", "votes");
    copy("ViewCount", "views");
    copy("Tags", "tags");
    std::string error;
    Accept(PostFromJson(obj, error), error, lineno, guard, result);
  }
  return result;
}

LoadResult LoadPosts(const std::filesystem::path& path, PostFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open posts file '" + path.string() + "'");
  switch (format) {
    case PostFormat::kJsonl:
      return ParseJsonl(in);
    case PostFormat::kCsv:
      return ParseCsv(in);
    case PostFormat::kStackExchangeXml:
      return ParseStackExchangeXml(in);
  }
  throw InvariantError("unknown post format");
}

void WriteJsonl(std::ostream& out, const std::vector<Post>& posts) {
  for (const auto& p : posts) {
    json obj = json::object();
    obj["id"] = p.id;
    obj["created_at"] = FormatTimestamp(p.created_at);
    obj["title"] = p.title;
    obj["body"] = p.body;
    obj["votes"] = p.votes;
    obj["views"] = p.views;
    if (!p.tags.empty()) obj["tags"] = p.tags;
    out << obj.dump() << '\n';
  }
}

void WritePostsJsonl(const std::filesystem::path& path,
                     const std::vector<Post>& posts) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  WriteJsonl(out, posts);
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

Period Period::Of(Timestamp ts) {
  using namespace std::chrono;
  const year_month_day ymd{floor<days>(ts)};
  return {static_cast<int>(ymd.year()), static_cast<int>(
                                            static_cast<unsigned>(ymd.month()))};
}

std::optional<Period> Period::Parse(std::string_view text) {
  int y, m;
  if (text.size() != 7 || text[4] != '-' || !ParseDigits(text, 0, 4, y) ||
      !ParseDigits(text, 5, 2, m) || m < 1 || m > 12) {
    return std::nullopt;
  }
  return Period{y, m};
}

Period Period::Next() const {
  return month == 12 ? Period{year + 1, 1} : Period{year, month + 1};
}

std::string Period::Label() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

SliceResultSet SliceByPeriod(const std::vector<Post>& posts,
                             Granularity /*granularity*/, Period start,
                             Period end) {
  if (end < start) throw ValidationError("slice range: start is after end");
  SliceResultSet out;
  std::map<Period, std::size_t> index;
  for (Period p = start; p <= end; p = p.Next()) {
    index[p] = out.slices.size();
    out.slices.push_back({out.slices.size(), p.Label(), {}});
  }
  for (const auto& post : posts) {
    auto it = index.find(Period::Of(post.created_at));
    if (it == index.end()) {
      ++out.excluded;
      continue;
    }
    out.slices[it->second].post_ids.push_back(post.id);
  }
  return out;
}

}  // namespace topicstream
