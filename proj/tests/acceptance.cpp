#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include <json.hpp>

#include "kpqg/backends.hpp"
#include "kpqg/importance.hpp"
#include "kpqg/instances.hpp"
#include "kpqg/maskfill.hpp"
#include "kpqg/metrics.hpp"
#include "kpqg/scheduler.hpp"
#include "stub_server.hpp"

using namespace kpqg;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kFixtures = KPQG_FIXTURE_DIR;
const std::string kGolden = KPQG_GOLDEN_DIR;
const std::string kCli = KPQG_CLI_PATH;

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects failures without stopping at the first one.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && out_.pass) out_.detail = what;
    out_.pass = out_.pass && ok;
  }
  void note(const std::string& text) {
    if (out_.pass) out_.detail = text;
  }
  Outcome result() const { return out_; }

 private:
  Outcome out_;
};

std::string rendered(const TokenSeq& seq) { return join_tokens(seq); }

bool is_subsequence(const TokenSeq& needle, const TokenSeq& hay) {
  std::size_t i = 0;
  for (const auto& t : hay) {
    if (i < needle.size() && t == needle[i]) ++i;
  }
  return i == needle.size();
}

Outcome table3_reproduction() {
  Check c;
  TokenSeq q;
  for (int i = 1; i <= 9; ++i) q.push_back(Token::word("q" + std::to_string(i)));
  // Ranking q4, q6, q2, q5, q3, q1, q9, q7, q8 as zero-based positions.
  auto got = build_instances(words({"C"}), words({"A"}), q, std::vector<std::size_t>{3, 5, 1, 4, 2, 0, 8, 6, 7});
  const std::vector<std::pair<std::string, std::string>> expected{
      {"C [S] A [S] [M]", "q4"},
      {"C [S] A [S] [M] q4 [M]", "q2 q6"},
      {"C [S] A [S] [M] q2 [M] q4 [M] q6 [M]", "q1 q3 q5 q9"},
      {"C [S] A [S] [M] q1 [M] q2 [M] q3 [M] q4 [M] q5 [M] q6 [M] q9 [M]", "[S] [S] [S] [S] [S] [S] q7 [S]"},
      {"C [S] A [S] q1 q2 q3 q4 q5 q6 [M] q7 [M] q9", "[S] q8"},
      {"C [S] A [S] q1 q2 q3 q4 q5 q6 q7 [M] q8 [M] q9", "[S] [S]"},
  };
  c.expect(got.size() == expected.size(), "expected 6 instances, got " + std::to_string(got.size()));
  for (std::size_t i = 0; i < std::min(got.size(), expected.size()); ++i) {
    c.expect(rendered(got[i].input) == expected[i].first, "input " + std::to_string(i) + ": " + rendered(got[i].input));
    c.expect(rendered(got[i].labels) == expected[i].second,
             "labels " + std::to_string(i) + ": " + rendered(got[i].labels));
  }
  c.note("6 instances, inputs and labels exact");
  return c.result();
}

Outcome pad_variants() {
  Check c;
  auto got = padded_variants(tokenize("how is the weather today?"));
  const std::vector<std::string> expected{
      "[PAD] is the weather today ?", "how [PAD] the weather today ?", "how is [PAD] weather today ?",
      "how is the [PAD] today ?",     "how is the weather [PAD] ?",    "how is the weather today [PAD]",
  };
  c.expect(got.size() == expected.size(), "expected 6 variants, got " + std::to_string(got.size()));
  for (std::size_t i = 0; i < std::min(got.size(), expected.size()); ++i) {
    c.expect(rendered(got[i]) == expected[i], "variant " + std::to_string(i) + ": " + rendered(got[i]));
  }
  c.note("6 variants in positional order");
  return c.result();
}

Outcome figure1_trace() {
  Check c;
  const std::vector<TokenSeq> keywords{words({"project"}), words({"mars"})};
  auto state = init_state(words({"C"}), words({"A"}), keywords);
  auto view = masked_view(state);
  c.expect(rendered(view.sequence) == "C [S] A [S] [M] project [M] mars [M]", "initial view: " + rendered(view.sequence));

  state = apply_predictions(state, {words({"Who", "planet", "?"})});
  c.expect(rendered(state.question()) == "Who project planet mars ?", "after step 1: " + rendered(state.question()));
  c.expect(state.open_gaps() == 6, "open gaps after step 1: " + std::to_string(state.open_gaps()));

  auto script = ScriptedFiller::load(kFixtures + "/case1_script.json");
  auto result = decode(words({"C"}), words({"A"}), keywords, script);
  c.expect(!result.trace.empty() && result.trace[0].predictions == words({"Who", "planet", "?"}),
           "first scripted step differs");
  c.expect(render(result.question) == "Who helped NASA on the project to conquer planet mars?",
           "final question: " + render(result.question));
  c.expect(!result.truncated, "decode was truncated");
  c.note(std::to_string(result.trace.size()) + " iterations to \"" + render(result.question) + "\"");
  return c.result();
}

// Deterministic stand-in for a learned filler: predictions are a hash of
// the view, so replays are reproducible but otherwise arbitrary.
class HashFiller final : public MaskFiller {
 public:
  HashFiller(std::uint64_t salt, unsigned seal_percent) : salt_(salt), seal_percent_(seal_percent) {}

  FillResponse fill(const FillRequest& req) const override {
    static const std::vector<std::string> vocab{"who", "what", "the", "mars", "did", "planet", "?", "to"};
    auto key = join_tokens(req.sequence);
    FillResponse out;
    for (std::size_t i = 0; i < req.mask_positions.size(); ++i) {
      auto h = std::hash<std::string>{}(key + "#" + std::to_string(i)) ^ salt_;
      h *= 0x9E3779B97F4A7C15ull;
      h ^= h >> 29;
      if (h % 100 < seal_percent_) out.predictions.push_back(Token::sep());
      else out.predictions.push_back(Token::word(vocab[(h >> 8) % vocab.size()]));
    }
    return out;
  }
  std::string name() const override { return "hash"; }

 private:
  std::uint64_t salt_;
  unsigned seal_percent_;
};

// Random subset of positions, grouped into phrases of adjacent positions.
std::vector<TokenSeq> random_keywords(const TokenSeq& q, std::mt19937_64& rng) {
  std::vector<TokenSeq> out;
  auto keep_percent = rng() % 60;
  bool in_run = false;
  for (const auto& t : q) {
    if (rng() % 100 < keep_percent) {
      if (!in_run) out.emplace_back();
      out.back().push_back(t);
      in_run = true;
    } else {
      in_run = false;
    }
  }
  return out;
}

Outcome oracle_round_trip() {
  Check c;
  const std::vector<std::string> vocab{"what", "did", "the", "boy", "see", "in", "park", "?", "a", "dog", "who", "go"};
  const TokenSeq context = tokenize("The boy went to the park with a dog .");
  const TokenSeq answer = words({"a", "dog"});
  std::mt19937_64 rng(20240917);

  std::size_t oracle_cases = 0, oracle_failures = 0;
  for (; oracle_cases < 600; ++oracle_cases) {
    TokenSeq q;
    auto len = 1 + rng() % 24;
    for (std::size_t i = 0; i < len; ++i) q.push_back(Token::word(vocab[rng() % vocab.size()]));
    std::vector<std::size_t> order(len);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    auto keywords = random_keywords(q, rng);

    auto oracle = make_oracle_filler(build_instances(context, answer, q, order));
    auto result = decode(context, answer, keywords, oracle);
    TokenSeq flat;
    for (const auto& k : keywords) flat.insert(flat.end(), k.begin(), k.end());
    bool ok = result.question == q && is_subsequence(flat, result.question) && !result.truncated;
    if (!ok && oracle_failures++ == 0) {
      c.expect(false, "oracle mismatch: gold \"" + rendered(q) + "\" got \"" + rendered(result.question) + "\"");
    }
  }

  auto toy = make_filler("toy");
  std::size_t fuzz_cases = 0, fuzz_failures = 0;
  for (; fuzz_cases < 1200; ++fuzz_cases) {
    TokenSeq q;
    auto len = 1 + rng() % 12;
    for (std::size_t i = 0; i < len; ++i) q.push_back(Token::word(vocab[rng() % vocab.size()]));
    auto keywords = random_keywords(q, rng);
    DecodeLimits limits{1 + rng() % 30, 1 + rng() % 20};
    HashFiller hash(rng(), 20 + rng() % 70);
    const MaskFiller& filler = fuzz_cases % 4 == 0 ? static_cast<const MaskFiller&>(*toy) : hash;
    auto result = decode(context, answer, keywords, filler, limits);
    TokenSeq flat;
    for (const auto& k : keywords) flat.insert(flat.end(), k.begin(), k.end());
    bool ok = is_subsequence(flat, result.question) && result.trace.size() <= limits.max_iterations;
    if (!ok && fuzz_failures++ == 0) {
      c.expect(false, "keyword order lost: \"" + rendered(flat) + "\" in \"" + rendered(result.question) + "\"");
    }
  }
  c.note(std::to_string(oracle_cases) + " oracle cases, " + std::to_string(fuzz_cases) + " fuzz cases, " +
         std::to_string(oracle_failures + fuzz_failures) + " failures");
  return c.result();
}

std::vector<TokenSeq> corpus(std::initializer_list<const char*> lines) {
  std::vector<TokenSeq> out;
  for (auto* l : lines) out.push_back(tokenize(l));
  return out;
}

Outcome metric_fixtures() {
  Check c;
  auto ident = corpus({"what did the boy see in the park ?", "who helped nasa on the project to conquer planet mars ?",
                       "how is the weather today ?", "why"});
  for (int n = 1; n <= 4; ++n) {
    double b = metrics::bleu(ident, ident, n);
    c.expect(std::abs(b - 100.0) <= 1e-9, "identity BLEU-" + std::to_string(n) + " = " + std::to_string(b));
  }
  double r = metrics::rouge_l(ident, ident);
  c.expect(std::abs(r - 100.0) <= 1e-9, "identity ROUGE-L = " + std::to_string(r));

  double b1 = metrics::bleu(corpus({"the the the"}), corpus({"the cat"}), 1);
  c.expect(std::abs(b1 - 33.33) <= 0.01, "BLEU-1 the the the = " + std::to_string(b1));
  double rl = metrics::rouge_l(corpus({"police kill the gunman"}), corpus({"police killed the gunman"}));
  c.expect(std::abs(rl - 75.0) <= 0.01, "ROUGE-L LCS example = " + std::to_string(rl));
  double m = metrics::meteor_lite(corpus({"weather today"}), corpus({"today weather"}));
  c.expect(std::abs(m - 50.0) <= 0.01, "METEOR-lite swapped bigram = " + std::to_string(m));

  const std::vector<std::string> vocab{"who", "what", "the", "a", "did", "is", "mars", "planet", "nasa", "project", "?", "of"};
  std::mt19937 rng(1000);
  auto sentence = [&] {
    TokenSeq s;
    auto n = 1 + rng() % 15;
    for (std::size_t i = 0; i < n; ++i) s.push_back(Token::word(vocab[rng() % vocab.size()]));
    return s;
  };
  int violations = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<TokenSeq> cand, ref;
    auto n = 1 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      ref.push_back(sentence());
      cand.push_back(sentence());
    }
    auto stats = metrics::corpus_stats(cand, ref);
    double prev = metrics::bleu_from_stats(stats, 1);
    for (int k = 2; k <= 4; ++k) {
      double cur = metrics::bleu_from_stats(stats, k);
      if (cur > prev + 1e-9) {
        ++violations;
        break;
      }
      prev = cur;
    }
  }
  c.expect(violations == 0, std::to_string(violations) + " of 200 random corpora break BLEU order monotonicity");
  c.note("identity 100, hand cases 33.33/75.00/50.00, monotone on 200 random corpora");
  return c.result();
}

struct RunResult {
  int exit_code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  RunResult r;
  std::string cmd = "'" + kCli + "' " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Outcome dataset_stats() {
  Check c;
  auto dir = fs::temp_directory_path() / ("kpqg_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  auto made = run_cli("fixture --seed 7 --sizes 5,2,3 --out '" + dir.string() + "'");
  c.expect(made.exit_code == 0, "fixture command failed");
  auto st = run_cli("stats --data '" + dir.string() + "' --json");
  c.expect(st.exit_code == 0, "stats command failed");
  if (st.exit_code == 0) {
    auto j = json::parse(st.out);
    c.expect(j == json{{"train", 5}, {"test", 2}, {"dev", 3}}, "fixture stats: " + j.dump());
  }
  fs::remove_all(dir);

  std::string real_note = "real EQG-RACE not provided (set KPQG_EQG_RACE_DIR)";
  if (const char* real = std::getenv("KPQG_EQG_RACE_DIR")) {
    auto rs = run_cli("stats --data '" + std::string(real) + "' --json");
    c.expect(rs.exit_code == 0, "stats on real release failed");
    if (rs.exit_code == 0) {
      auto j = json::parse(rs.out);
      c.expect(j == json{{"train", 17445}, {"test", 950}, {"dev", 1035}}, "real release stats: " + j.dump());
    }
    real_note = "real EQG-RACE 17445/950/1035";
  }
  c.note("fixture 5/2/3; " + real_note);
  return c.result();
}

std::string golden_line(const std::string& name) {
  std::ifstream in(kGolden + "/" + name);
  std::string line;
  std::getline(in, line);
  return line;
}

Outcome remote_protocols() {
  Check c;
  using kpqg::testing::StubServer;
  StubServer stub([](const std::string& path, const std::string&) {
    if (path == "/fill") return StubServer::Reply{200, golden_line("remote_fill_response.json")};
    return StubServer::Reply{200, golden_line("remote_score_response.json")};
  });

  auto state = init_state(words({"C"}), words({"A"}), {words({"project"}), words({"mars"})});
  auto filled = RemoteFiller(stub.url()).fill(masked_view(state));
  c.expect(filled.predictions == words({"Who", "planet", "?"}), "fill response decoded wrongly");

  auto conf = RemoteScorer(stub.url()).score(words({"C"}), TokenSeq{Token::pad(), Token::word("q2"), Token::word("q3")},
                                             words({"A"}));
  c.expect(std::abs(conf - 0.9) < 1e-12, "score response decoded wrongly");

  auto reqs = stub.requests();
  c.expect(reqs.size() == 2, "expected 2 requests");
  if (reqs.size() == 2) {
    c.expect(reqs[0].second == golden_line("remote_fill_request.json"), "fill request body: " + reqs[0].second);
    c.expect(reqs[1].second == golden_line("remote_score_request.json"), "score request body: " + reqs[1].second);
  }
  c.note("fill and score request/response bodies match golden JSON");
  return c.result();
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"table3-reproduction", 1.0, table3_reproduction},
      {"pad-ablation-variants", 1.0, pad_variants},
      {"figure1-trace", 1.0, figure1_trace},
      {"oracle-round-trip", 60.0, oracle_round_trip},
      {"metric-fixtures", 10.0, metric_fixtures},
      {"dataset-stats", 60.0, dataset_stats},
      {"remote-protocols", 10.0, remote_protocols},
  };

  int failed = 0;
  for (const auto& crit : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = crit.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > crit.budget_seconds) {
      out.pass = false;
      out.detail += " (over time budget)";
    }
    std::printf("%s %-22s %8.3fs  %s\n", out.pass ? "PASS" : "FAIL", crit.name, secs, out.detail.c_str());
    failed += out.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
