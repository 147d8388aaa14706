#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "kpqg/backends.hpp"
#include "kpqg/dataio.hpp"
#include "kpqg/error.hpp"
#include "kpqg/gateway.hpp"
#include "kpqg/importance.hpp"
#include "kpqg/instances.hpp"
#include "kpqg/metrics.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw kpqg::Error(kpqg::ErrorCode::FileMissing, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

kpqg::LoadResult load_any(const std::string& path, const std::string& split_name) {
  if (fs::is_directory(path)) return kpqg::load_dataset_dir(path);
  auto split = kpqg::parse_split(split_name);
  if (!split) throw kpqg::Error(kpqg::ErrorCode::InvalidArgument, "unknown split: " + split_name);
  return kpqg::load_dataset(path, *split);
}

void report_issues(const std::string& path, const kpqg::LoadResult& loaded) {
  for (const auto& issue : loaded.issues) {
    std::cerr << path << ":" << issue.line << ": skipped: " << issue.reason << "\n";
  }
}

kpqg::FixtureSizes parse_sizes(const std::string& text) {
  std::vector<std::size_t> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      auto v = std::stoul(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      parts.push_back(v);
    } catch (const std::exception&) {
      throw kpqg::Error(kpqg::ErrorCode::InvalidArgument, "bad --sizes value: " + text);
    }
  }
  if (parts.size() != 3) throw kpqg::Error(kpqg::ErrorCode::InvalidArgument, "--sizes expects train,test,dev");
  return {parts[0], parts[1], parts[2]};
}

std::atomic<kpqg::Service*> g_service{nullptr};

void on_signal(int) {
  if (auto* s = g_service.load()) s->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Keyword-guided insertion question generation toolkit"};
  app.require_subcommand(1);

  std::string data, out, split = "train", scorer_sel = "overlap";
  bool as_json = false;

  auto* ingest = app.add_subcommand("ingest", "Validate a JSONL dataset and write the clean records");
  ingest->add_option("--data", data, "Input JSONL file")->required();
  ingest->add_option("--split", split, "Split label for the file (train, test, dev)");
  ingest->add_option("--out", out, "Output JSONL (default stdout)");

  auto* stats = app.add_subcommand("stats", "Count records per split");
  stats->add_option("--data", data, "Dataset directory or JSONL file")->required();
  stats->add_option("--split", split, "Split label when --data is a file");
  stats->add_flag("--json", as_json, "Emit JSON");

  std::string context, answer, question;
  auto* rank = app.add_subcommand("rank", "Rank question tokens by pad-ablation importance");
  rank->add_option("--data", data, "Dataset JSONL file");
  rank->add_option("--context", context, "Passage (single example)");
  rank->add_option("--answer", answer, "Answer (single example)");
  rank->add_option("--question", question, "Question (single example)");
  rank->add_option("--scorer", scorer_sel, "overlap | scripted:<path> | remote");
  rank->add_option("--out", out, "Output JSONL (default stdout)");

  auto* build = app.add_subcommand("build", "Build importance-first training instances");
  build->add_option("--data", data, "Dataset JSONL file")->required();
  build->add_option("--scorer", scorer_sel, "overlap | scripted:<path> | remote");
  build->add_option("--out", out, "Output JSONL (default stdout)");

  std::vector<std::string> keywords;
  std::string mode = "insertion", filler_sel = "toy";
  kpqg::DecodeLimits limits;
  kpqg::FillerOptions filler_opts;
  std::string toy_corpus;
  auto* decode = app.add_subcommand("decode", "Generate a question from context, answer and keywords");
  decode->add_option("--context", context, "Passage")->required();
  decode->add_option("--answer", answer, "Answer")->required();
  decode->add_option("--keyword,-k", keywords, "Keyword phrase, in order (repeatable)");
  decode->add_option("--mode", mode, "insertion | autoregressive");
  decode->add_option("--filler", filler_sel, "toy | scripted:<path> | remote");
  decode->add_option("--max-new-tokens", limits.max_new_tokens, "Generated token budget");
  decode->add_option("--max-iterations", limits.max_iterations, "Fill-step budget");
  decode->add_option("--toy-corpus", toy_corpus, "Corpus for the toy filler");
  decode->add_option("--sep-threshold", filler_opts.sep_threshold, "Toy filler sealing threshold");
  decode->add_flag("--json", as_json, "Emit the full trace as JSON");

  std::string pred, ref, label = "kpqg";
  auto* eval = app.add_subcommand("eval", "Score predictions against references");
  eval->add_option("--pred", pred, "Prediction file, one question per line")->required();
  eval->add_option("--ref", ref, "Reference file, one question per line")->required();
  eval->add_option("--label", label, "Row label");
  eval->add_flag("--json", as_json, "Emit JSON");

  std::uint64_t seed = 7;
  std::string sizes = "5,2,3";
  auto* fixture = app.add_subcommand("fixture", "Write a deterministic synthetic dataset");
  fixture->add_option("--seed", seed, "Random seed");
  fixture->add_option("--sizes", sizes, "train,test,dev record counts");
  fixture->add_option("--out", out, "Output directory")->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  std::vector<std::string> fillers{"toy"};
  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port (0 picks a free port)");
  serve->add_option("--filler", fillers, "Filler backends to register; the first is the default");
  serve->add_option("--scorer", scorer_sel, "Scorer backend");
  serve->add_option("--toy-corpus", toy_corpus, "Corpus for the toy filler");
  serve->add_option("--sep-threshold", filler_opts.sep_threshold, "Toy filler sealing threshold");

  CLI11_PARSE(app, argc, argv);
  if (!toy_corpus.empty()) filler_opts.toy_corpus = toy_corpus;

  try {
    if (*ingest) {
      auto loaded = load_any(data, split);
      report_issues(data, loaded);
      Output o(out);
      for (const auto& r : loaded.records) o.stream() << kpqg::to_json_line(r) << "\n";
      std::cerr << "kept " << loaded.records.size() << " records, skipped " << loaded.issues.size() << " lines\n";
    } else if (*stats) {
      auto loaded = load_any(data, split);
      report_issues(data, loaded);
      auto s = kpqg::stats(loaded.records);
      std::cout << (as_json ? kpqg::stats_json(s) + "\n" : kpqg::stats_table(s));
    } else if (*rank) {
      auto scorer = kpqg::make_scorer(scorer_sel);
      std::vector<kpqg::DatasetRecord> records;
      if (!data.empty()) {
        auto loaded = load_any(data, split);
        report_issues(data, loaded);
        records = std::move(loaded.records);
      } else {
        records.push_back({"", context, answer, question, kpqg::Split::Train});
      }
      Output o(out);
      for (const auto& r : records) {
        auto q = kpqg::tokenize(r.question);
        auto ranking = kpqg::rank_importance(kpqg::tokenize(r.context), kpqg::tokenize(r.answer), q, *scorer);
        ordered_json line;
        if (!r.id.empty()) line["id"] = r.id;
        line["tokens"] = kpqg::texts(q);
        line["order"] = ranking.order;
        line["confidences"] = ranking.confidences;
        o.stream() << line.dump() << "\n";
      }
    } else if (*build) {
      auto scorer = kpqg::make_scorer(scorer_sel);
      auto loaded = load_any(data, split);
      report_issues(data, loaded);
      std::vector<kpqg::BuildJob> jobs;
      for (const auto& r : loaded.records) {
        kpqg::BuildJob job{kpqg::tokenize(r.context), kpqg::tokenize(r.answer), kpqg::tokenize(r.question), {}};
        job.order = kpqg::rank_importance(job.context, job.answer, job.question, *scorer).order;
        jobs.push_back(std::move(job));
      }
      auto built = kpqg::build_instances_batch(jobs);
      Output o(out);
      std::size_t total = 0;
      for (const auto& instances : built) {
        kpqg::write_instances(o.stream(), instances);
        total += instances.size();
      }
      std::cerr << "wrote " << total << " instances from " << jobs.size() << " records\n";
    } else if (*decode) {
      ordered_json body{{"context", context}, {"answer", answer}, {"keywords", keywords}, {"mode", mode},
                        {"max_new_tokens", limits.max_new_tokens}, {"max_iterations", limits.max_iterations}};
      auto req = kpqg::parse_generate_request(body.dump());
      auto filler = kpqg::make_filler(filler_sel, filler_opts);
      auto text = kpqg::run_generate(req, *filler);
      auto result = nlohmann::json::parse(text);
      if (as_json) {
        std::cout << text << "\n";
      } else {
        std::cout << result["question"].get<std::string>() << "\n";
        if (result["truncated"].get<bool>()) std::cerr << "note: decoding hit a limit and was truncated\n";
      }
    } else if (*eval) {
      auto report = kpqg::metrics::evaluate_corpus(pred, ref);
      if (as_json) {
        std::cout << kpqg::metrics::report_json(report) << "\n";
      } else {
        std::cout << kpqg::metrics::render_header() << "\n" << kpqg::metrics::render_row(label, report) << "\n";
      }
    } else if (*fixture) {
      kpqg::make_fixture(seed, parse_sizes(sizes), out);
    } else if (*serve) {
      kpqg::Backends backends;
      for (const auto& sel : fillers) {
        auto name = kpqg::backend_name(sel);
        backends.fillers[name] = kpqg::make_filler(sel, filler_opts);
        if (backends.default_filler.empty()) backends.default_filler = name;
      }
      backends.scorer = kpqg::make_scorer(scorer_sel);
      auto gateway = std::make_shared<const kpqg::Gateway>(std::move(backends));
      kpqg::Service service(gateway);
      int bound = service.bind(host, port);
      if (bound <= 0) throw kpqg::Error(kpqg::ErrorCode::InvalidArgument, "cannot bind " + host);
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      g_service = &service;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      service.listen();
      g_service = nullptr;
    }
  } catch (const kpqg::Error& e) {
    std::cerr << "error: " << kpqg::to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
