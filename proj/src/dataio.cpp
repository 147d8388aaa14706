#include "kpqg/dataio.hpp"

#include <array>
#include <fstream>
#include <random>

#include <json.hpp>

#include "kpqg/error.hpp"
#include "kpqg/text.hpp"

namespace kpqg {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Test: return "test";
    case Split::Dev: return "dev";
  }
  return "train";
}

std::optional<Split> parse_split(std::string_view name) {
  for (auto s : kAllSplits) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

LoadResult load_dataset(const std::filesystem::path& path, Split split) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileMissing, "cannot open dataset " + path.string());
  LoadResult result;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      DatasetRecord rec;
      rec.id = j.at("id").get<std::string>();
      rec.context = j.at("context").get<std::string>();
      rec.answer = j.at("answer").get<std::string>();
      rec.question = j.at("question").get<std::string>();
      rec.split = split;
      for (const auto* field : {&rec.context, &rec.answer, &rec.question}) {
        if (tokenize(*field).empty()) throw Error(ErrorCode::MalformedLine, "empty field after tokenization");
      }
      result.records.push_back(std::move(rec));
    } catch (const json::exception& e) {
      result.issues.push_back({lineno, e.what()});
    } catch (const Error& e) {
      result.issues.push_back({lineno, e.what()});
    }
  }
  return result;
}

LoadResult load_dataset_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw Error(ErrorCode::FileMissing, "not a directory: " + dir.string());
  LoadResult all;
  for (auto split : kAllSplits) {
    auto file = dir / (std::string(to_string(split)) + ".jsonl");
    if (!std::filesystem::exists(file)) continue;
    auto part = load_dataset(file, split);
    all.records.insert(all.records.end(), part.records.begin(), part.records.end());
    for (auto& issue : part.issues) {
      issue.reason = file.filename().string() + ": " + issue.reason;
      all.issues.push_back(std::move(issue));
    }
  }
  return all;
}

std::string to_json_line(const DatasetRecord& record) {
  ordered_json j;
  j["id"] = record.id;
  j["context"] = record.context;
  j["answer"] = record.answer;
  j["question"] = record.question;
  return j.dump();
}

void write_dataset(const std::filesystem::path& path, std::span<const DatasetRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileMissing, "cannot write " + path.string());
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

std::size_t& DatasetStats::operator[](Split s) {
  switch (s) {
    case Split::Train: return train;
    case Split::Test: return test;
    case Split::Dev: return dev;
  }
  return train;
}

std::size_t DatasetStats::operator[](Split s) const { return const_cast<DatasetStats&>(*this)[s]; }

DatasetStats stats(std::span<const DatasetRecord> records) {
  DatasetStats s;
  for (const auto& r : records) ++s[r.split];
  return s;
}

std::string stats_table(const DatasetStats& s) {
  std::string out;
  out += "|                | Train | Test  | Dev   |\n";
  char row[128];
  std::snprintf(row, sizeof row, "| # of instances | %5zu | %5zu | %5zu |\n", s.train, s.test, s.dev);
  out += row;
  return out;
}

std::string stats_json(const DatasetStats& s) {
  ordered_json j;
  j["train"] = s.train;
  j["test"] = s.test;
  j["dev"] = s.dev;
  return j.dump();
}

namespace {

constexpr std::array kNames{"Anna", "Ben", "Carlos", "Dana", "Emil", "Fatima", "Grace", "Hiro", "Ines", "Jonas"};
constexpr std::array kCities{"Boston", "Lyon", "Osaka", "Nairobi", "Lima", "Oslo", "Perth", "Quito"};
constexpr std::array kPlaces{"market", "library", "bakery", "museum", "park", "station"};
constexpr std::array kItems{"bread", "apples", "books", "flowers", "stamps", "maps"};
constexpr std::array kDays{"Monday", "Tuesday", "Friday", "Saturday", "Sunday"};
constexpr std::array kActivities{"painting", "swimming", "reading", "cycling", "singing", "chess"};

template <typename Array>
std::string pick(std::mt19937_64& rng, const Array& options) {
  return options[rng() % options.size()];
}

DatasetRecord make_record(std::mt19937_64& rng, Split split, std::uint64_t seed, std::size_t index) {
  auto name = pick(rng, kNames);
  auto city = pick(rng, kCities);
  auto place = pick(rng, kPlaces);
  auto item = pick(rng, kItems);
  auto day = pick(rng, kDays);
  auto activity = pick(rng, kActivities);

  DatasetRecord r;
  char id[64];
  std::snprintf(id, sizeof id, "%s-%llu-%04zu", std::string(to_string(split)).c_str(),
                static_cast<unsigned long long>(seed), index);
  r.id = id;
  r.split = split;
  r.context = name + " lives in " + city + " with their family. Every " + day + ", " + name + " goes to the " +
              place + " to buy " + item + ". " + name + " enjoys " + activity + " after school.";
  switch (rng() % 4) {
    case 0:
      r.question = "Where does " + name + " live?";
      r.answer = city;
      break;
    case 1:
      r.question = "What does " + name + " buy at the " + place + "?";
      r.answer = item;
      break;
    case 2:
      r.question = "When does " + name + " go to the " + place + "?";
      r.answer = "every " + day;
      break;
    default:
      r.question = "What does " + name + " enjoy after school?";
      r.answer = activity;
      break;
  }
  return r;
}

}  // namespace

std::vector<DatasetRecord> fixture_records(std::uint64_t seed, FixtureSizes sizes) {
  std::mt19937_64 rng(seed);
  std::vector<DatasetRecord> out;
  for (auto [split, n] : {std::pair{Split::Train, sizes.train}, std::pair{Split::Test, sizes.test},
                          std::pair{Split::Dev, sizes.dev}}) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(make_record(rng, split, seed, i));
  }
  return out;
}

void make_fixture(std::uint64_t seed, FixtureSizes sizes, const std::filesystem::path& dir) {
  if (sizes.train == 0 || sizes.test == 0 || sizes.dev == 0) {
    throw Error(ErrorCode::InvalidArgument, "fixture sizes must be positive");
  }
  std::filesystem::create_directories(dir);
  auto records = fixture_records(seed, sizes);
  for (auto split : kAllSplits) {
    std::vector<DatasetRecord> part;
    for (const auto& r : records) {
      if (r.split == split) part.push_back(r);
    }
    write_dataset(dir / (std::string(to_string(split)) + ".jsonl"), part);
  }
}

}  // namespace kpqg
