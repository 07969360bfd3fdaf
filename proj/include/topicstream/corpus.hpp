#pragma once

// Post ingestion (JSONL, CSV, Stack Exchange Posts.xml) and calendar slicing.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace topicstream {

using Timestamp = std::chrono::sys_seconds;

struct Post {
  std::string id;
  Timestamp created_at{};
  std::string title;
  std::string body;
  // Net score; negative when downvotes exceed upvotes.
  std::int64_t votes = 0;
  std::int64_t views = 0;
  std::vector<std::string> tags;

  // Title and body joined with one space.
  std::string Text() const;

  bool operator==(const Post&) const = default;
};

enum class PostFormat { kJsonl, kCsv, kStackExchangeXml };

std::optional<PostFormat> ParsePostFormat(std::string_view name);

struct RecordError {
  std::size_t record = 0;  // 1-based line (JSONL/XML) or row (CSV)
  std::string message;
};

struct LoadResult {
  std::vector<Post> posts;
  std::vector<RecordError> errors;
  // Rows legitimately skipped (non-question rows in Posts.xml).
  std::size_t skipped = 0;
};

// Throws Error(kIo) when the file cannot be read. Malformed records are
// collected in LoadResult::errors; duplicates of an earlier id are errors too.
LoadResult LoadPosts(const std::filesystem::path& path, PostFormat format);

LoadResult ParseJsonl(std::istream& in);
LoadResult ParseCsv(std::istream& in);
LoadResult ParseStackExchangeXml(std::istream& in);

// Writes posts in the JSONL interchange format (one object per line).
void WriteJsonl(std::ostream& out, const std::vector<Post>& posts);
void WritePostsJsonl(const std::filesystem::path& path,
                     const std::vector<Post>& posts);

// RFC 3339 ("2017-01-05T00:00:00Z", offsets, fractional seconds) and the
// zone-less Stack Exchange form ("2017-01-05T12:34:56.789", read as UTC).
std::optional<Timestamp> ParseTimestamp(std::string_view text);
std::string FormatTimestamp(Timestamp ts);

// A calendar month.
struct Period {
  int year = 1970;
  int month = 1;  // 1..12

  static Period Of(Timestamp ts);
  static std::optional<Period> Parse(std::string_view text);  // "YYYY-MM"

  Period Next() const;
  std::string Label() const;

  auto operator<=>(const Period&) const = default;
};

enum class Granularity { kMonth };

struct TimeSlice {
  std::size_t index = 0;
  std::string period_label;
  std::vector<std::string> post_ids;
};

struct SliceResultSet {
  std::vector<TimeSlice> slices;
  std::size_t excluded = 0;
};

// One slice per month in [start, end], empty months included. Posts outside
// the range are excluded and counted. Within a slice, ids keep input order.
SliceResultSet SliceByPeriod(const std::vector<Post>& posts,
                             Granularity granularity, Period start,
                             Period end);

}  // namespace topicstream
