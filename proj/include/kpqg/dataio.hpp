#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kpqg {

enum class Split { Train, Test, Dev };

inline constexpr Split kAllSplits[] = {Split::Train, Split::Test, Split::Dev};

std::string_view to_string(Split split);
std::optional<Split> parse_split(std::string_view name);

struct DatasetRecord {
  std::string id;
  std::string context;
  std::string answer;
  std::string question;
  Split split = Split::Train;

  friend bool operator==(const DatasetRecord&, const DatasetRecord&) = default;
};

struct LoadIssue {
  std::size_t line = 0;  // 1-based
  std::string reason;
};

struct LoadResult {
  std::vector<DatasetRecord> records;
  std::vector<LoadIssue> issues;
};

/// Reads JSONL with id/context/answer/question. Lines that fail to parse or
/// validate are skipped and reported; order is preserved. Throws FileMissing.
LoadResult load_dataset(const std::filesystem::path& path, Split split);

/// Loads <dir>/{train,test,dev}.jsonl, skipping split files that are absent.
LoadResult load_dataset_dir(const std::filesystem::path& dir);

std::string to_json_line(const DatasetRecord& record);
void write_dataset(const std::filesystem::path& path, std::span<const DatasetRecord> records);

struct DatasetStats {
  std::size_t train = 0;
  std::size_t test = 0;
  std::size_t dev = 0;

  std::size_t& operator[](Split s);
  std::size_t operator[](Split s) const;
  friend bool operator==(const DatasetStats&, const DatasetStats&) = default;
};

DatasetStats stats(std::span<const DatasetRecord> records);
std::string stats_table(const DatasetStats& s);
std::string stats_json(const DatasetStats& s);

struct FixtureSizes {
  std::size_t train = 0;
  std::size_t test = 0;
  std::size_t dev = 0;
};

/// Deterministic synthetic records from a small template grammar.
std::vector<DatasetRecord> fixture_records(std::uint64_t seed, FixtureSizes sizes);

/// Writes <dir>/{train,test,dev}.jsonl. Same seed gives byte-identical files.
void make_fixture(std::uint64_t seed, FixtureSizes sizes, const std::filesystem::path& dir);

}  // namespace kpqg
