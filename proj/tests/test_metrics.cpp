#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>

#include "kpqg/error.hpp"
#include "kpqg/metrics.hpp"

using namespace kpqg;
using namespace kpqg::metrics;

namespace {

std::vector<TokenSeq> corpus(std::initializer_list<const char*> lines) {
  std::vector<TokenSeq> out;
  for (auto* l : lines) out.push_back(tokenize(l));
  return out;
}

std::vector<std::string> lower_texts(const TokenSeq& seq) {
  std::vector<std::string> out;
  for (const auto& t : seq) out.push_back(to_lower(t.text));
  return out;
}

// Brute-force corpus BLEU: n-grams compared element-wise, clipping by
// counting occurrences with nested scans.
double naive_bleu(const std::vector<TokenSeq>& cands, const std::vector<TokenSeq>& refs, int max_n) {
  double c = 0, r = 0;
  std::vector<double> match(max_n, 0), total(max_n, 0);
  for (std::size_t k = 0; k < cands.size(); ++k) {
    auto cand = lower_texts(cands[k]);
    auto ref = lower_texts(refs[k]);
    c += cand.size();
    r += ref.size();
    for (int n = 1; n <= max_n; ++n) {
      auto gram = [&](const std::vector<std::string>& s, std::size_t i) {
        return std::vector<std::string>(s.begin() + i, s.begin() + i + n);
      };
      auto count = [&](const std::vector<std::string>& s, const std::vector<std::string>& g) {
        int cnt = 0;
        for (std::size_t i = 0; i + n <= s.size(); ++i) cnt += gram(s, i) == g;
        return cnt;
      };
      std::vector<std::vector<std::string>> seen;
      for (std::size_t i = 0; i + n <= cand.size(); ++i) {
        auto g = gram(cand, i);
        total[n - 1] += 1;
        if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
        seen.push_back(g);
        match[n - 1] += std::min(count(cand, g), count(ref, g));
      }
    }
  }
  double log_sum = 0;
  for (int n = 0; n < max_n; ++n) {
    if (match[n] == 0) return 0.0;
    log_sum += std::log(match[n] / total[n]);
  }
  double bp = c < r ? std::exp(1 - r / c) : 1.0;
  return 100.0 * bp * std::exp(log_sum / max_n);
}

// Longest common subsequence by enumerating every subsequence of a.
std::size_t brute_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    std::vector<std::string> sub;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(a[i]);
    }
    std::size_t j = 0;
    for (const auto& t : b) {
      if (j < sub.size() && t == sub[j]) ++j;
    }
    if (j == sub.size()) best = std::max(best, sub.size());
  }
  return best;
}

TokenSeq random_sentence(std::mt19937& rng, std::size_t min_len, std::size_t max_len) {
  static const std::vector<std::string> vocab{"who", "what", "the", "a", "did", "is", "mars", "planet",
                                              "nasa", "project", "?", "of"};
  TokenSeq s;
  auto len = min_len + rng() % (max_len - min_len + 1);
  for (std::size_t i = 0; i < len; ++i) s.push_back(Token::word(vocab[rng() % vocab.size()]));
  return s;
}

TokenSeq noisy_copy(const TokenSeq& ref, std::mt19937& rng) {
  static const std::vector<std::string> vocab{"who", "what", "the", "did", "mars", "planet", "why"};
  TokenSeq out;
  for (const auto& t : ref) {
    auto roll = rng() % 10;
    if (roll < 2) continue;
    if (roll < 4) out.push_back(Token::word(vocab[rng() % vocab.size()]));
    else out.push_back(t);
    if (rng() % 10 == 0) out.push_back(Token::word(vocab[rng() % vocab.size()]));
  }
  if (out.empty()) out.push_back(ref.front());
  return out;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("identity corpora score 100") {
  auto c = corpus({"who once worked on the project to conquer planet mars?", "how is the weather today?", "why?"});
  for (int n = 1; n <= 4; ++n) CHECK(bleu(c, c, n) == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(rouge_l(c, c) == doctest::Approx(100.0).epsilon(1e-12));
  // Lines shorter than n contribute no n-grams; the order is dropped rather than zeroed.
  auto short_only = corpus({"why?", "who"});
  CHECK(bleu(short_only, short_only, 4) == doctest::Approx(100.0));
}

TEST_CASE("hand-computed BLEU-1 with clipping") {
  // clipped p1 = 1/3; c = 3 > r = 2 so no brevity penalty.
  CHECK(bleu(corpus({"the the the"}), corpus({"the cat"}), 1) == doctest::Approx(100.0 / 3.0).epsilon(1e-12));
  CHECK(bleu(corpus({"dogs bark"}), corpus({"cats meow"}), 1) == 0.0);
  // Brevity: c = 1 < r = 2, p1 = 1 -> exp(1 - 2).
  CHECK(bleu(corpus({"the"}), corpus({"the cat"}), 1) == doctest::Approx(100.0 * std::exp(-1.0)));
  // Case-insensitive matching.
  CHECK(bleu(corpus({"Who IS"}), corpus({"who is"}), 2) == doctest::Approx(100.0));
}

TEST_CASE("ROUGE-L hand example") {
  // LCS("police kill the gunman", "police killed the gunman") = 3, P = R = 0.75.
  CHECK(rouge_l(corpus({"police kill the gunman"}), corpus({"police killed the gunman"})) ==
        doctest::Approx(75.0).epsilon(1e-12));
  CHECK(rouge_l(corpus({"dogs bark"}), corpus({"cats meow"})) == 0.0);
  // P = 2/2, R = 2/4: (1 + 1.44) * 0.5 / (0.5 + 1.44) = 0.628866
  CHECK(rouge_l(corpus({"the cat"}), corpus({"the big cat sat"})) == doctest::Approx(100.0 * 2.44 * 0.5 / 1.94));
}

TEST_CASE("METEOR-lite hand examples") {
  // matches 2, chunks 2, F_mean 1, penalty 0.5
  CHECK(meteor_lite(corpus({"weather today"}), corpus({"today weather"})) == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(meteor_lite(corpus({"dogs bark"}), corpus({"cats meow"})) == 0.0);
  for (std::size_t n = 4; n <= 10; ++n) {
    TokenSeq s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(Token::word("w" + std::to_string(i)));
    double expected = 100.0 * (1.0 - 0.5 / static_cast<double>(n * n * n));
    CHECK(meteor_lite(std::vector<TokenSeq>{s}, std::vector<TokenSeq>{s}) == doctest::Approx(expected));
    CHECK(expected > 99.0);
  }
  // Stem stage: "planets" ~ "planet".
  auto a = meteor_align(std::vector<std::string>{"conquering", "planets"}, std::vector<std::string>{"conquer", "planet"});
  CHECK(a.matches == 2);
  CHECK(a.chunks == 1);
}

TEST_CASE("stemmer") {
  CHECK(stem("planets") == "planet");
  CHECK(stem("running") == "run");
  CHECK(stem("worked") == "work");
  CHECK(stem("studies") == "study");
  CHECK(stem("classes") == "class");
  CHECK(stem("boxes") == "box");
  CHECK(stem("glass") == "glass");
  CHECK(stem("is") == "is");
}

TEST_CASE("LCS against subsequence enumeration") {
  std::mt19937 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = lower_texts(random_sentence(rng, 0, 10));
    auto b = lower_texts(random_sentence(rng, 0, 10));
    CHECK(lcs_length(a, b) == brute_lcs(a, b));
  }
}

TEST_CASE("BLEU against the brute-force oracle") {
  std::mt19937 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TokenSeq> cands, refs;
    auto n_pairs = 1 + rng() % 6;
    for (std::size_t i = 0; i < n_pairs; ++i) {
      refs.push_back(random_sentence(rng, 4, 14));
      cands.push_back(rng() % 3 == 0 ? random_sentence(rng, 4, 14) : noisy_copy(refs.back(), rng));
      if (cands.back().size() < 4) cands.back() = refs.back();
    }
    for (int n = 1; n <= 4; ++n) CHECK(bleu(cands, refs, n) == doctest::Approx(naive_bleu(cands, refs, n)).epsilon(1e-9));
  }
}

TEST_CASE("property: scores bounded, order-invariant, parallel equals serial") {
  std::mt19937 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<TokenSeq> cands, refs;
    auto n_pairs = 1 + rng() % 12;
    for (std::size_t i = 0; i < n_pairs; ++i) {
      refs.push_back(random_sentence(rng, 1, 12));
      cands.push_back(noisy_copy(refs.back(), rng));
    }
    auto rep = score_corpus(cands, refs);
    for (double v : {rep.bleu1, rep.bleu2, rep.bleu3, rep.bleu4, rep.rouge_l, rep.meteor}) {
      CHECK(v >= 0.0);
      CHECK(v <= 100.0 + 1e-9);
    }
    CHECK(corpus_stats(cands, refs) == corpus_stats_serial(cands, refs));

    std::vector<std::size_t> perm(n_pairs);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<TokenSeq> pc, pr;
    for (auto i : perm) {
      pc.push_back(cands[i]);
      pr.push_back(refs[i]);
    }
    auto rep2 = score_corpus(pc, pr);
    CHECK(rep2.bleu4 == doctest::Approx(rep.bleu4).epsilon(1e-12));
    CHECK(rep2.rouge_l == doctest::Approx(rep.rouge_l).epsilon(1e-12));
    CHECK(rep2.meteor == doctest::Approx(rep.meteor).epsilon(1e-12));
  }
}

TEST_CASE("corpus BLEU order can rise when zero-match lines are short") {
  // Higher-order totals shrink by one per line, so a long exact line plus a
  // short unmatched line gives p2 = 9/12 > p1 = 10/14.
  auto cands = corpus({"a b c d e f g h i j", "w x y z"});
  auto refs = corpus({"a b c d e f g h i j", "k l m n"});
  CHECK(bleu(cands, refs, 1) == doctest::Approx(100.0 * 10.0 / 14.0));
  CHECK(bleu(cands, refs, 2) == doctest::Approx(100.0 * std::sqrt(10.0 / 14.0 * 9.0 / 12.0)));
  CHECK(bleu(cands, refs, 2) > bleu(cands, refs, 1));
}

TEST_CASE("corpus validation") {
  CHECK(code_of([] { bleu(corpus({"a"}), corpus({"a", "b"}), 4); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([] { bleu(std::vector<TokenSeq>{}, std::vector<TokenSeq>{}, 4); }) == ErrorCode::EmptyCorpus);
  CHECK(code_of([] { bleu(corpus({"a"}), corpus({"a"}), 5); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("evaluate_corpus reads files and renders the table row") {
  auto dir = std::filesystem::temp_directory_path() / "kpqg_metrics_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream p(dir / "pred.txt");
    p << "the the the\npolice kill the gunman\n";
    std::ofstream r(dir / "ref.txt");
    r << "the cat\npolice killed the gunman\n";
    std::ofstream s(dir / "short.txt");
    s << "one line\n";
  }
  auto same = evaluate_corpus(dir / "pred.txt", dir / "pred.txt");
  CHECK(same.bleu4 == doctest::Approx(100.0));
  CHECK(same.rouge_l == doctest::Approx(100.0));
  CHECK(same.n_pairs == 2);

  auto rep = evaluate_corpus(dir / "pred.txt", dir / "ref.txt");
  // ROUGE-L averages per pair: the first pair has LCS 1, P = 1/3, R = 1/2.
  double first = 2.44 * 0.5 * (1.0 / 3.0) / (0.5 + 1.44 / 3.0);
  CHECK(rep.rouge_l == doctest::Approx(100.0 * (first + 0.75) / 2.0));

  CHECK(code_of([&] { evaluate_corpus(dir / "pred.txt", dir / "short.txt"); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([&] { evaluate_corpus(dir / "missing.txt", dir / "ref.txt"); }) == ErrorCode::FileMissing);
  std::filesystem::remove_all(dir);
}

TEST_CASE("table row column order") {
  MetricsReport deberta{47.16, 32.81, 25.18, 20.19, 47.33, 22.55, 950};
  auto row = render_row("DeBERTa-QG", deberta);
  CHECK(row == "| DeBERTa-QG   |   47.16 |   32.81 |   25.18 |   20.19 |   47.33 |   22.55 |");
  CHECK(render_header() == "| Model        |  BLEU 1 |  BLEU 2 |  BLEU 3 |  BLEU 4 | ROUGE-L |  METEOR |");
  CHECK(report_json(deberta).starts_with(R"({"bleu1":47.16,"bleu2":32.81,"bleu3":25.18,"bleu4":20.19,"rouge_l":47.33,"meteor":22.55)"));
}
