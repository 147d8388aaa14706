#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kpqg/text.hpp"

namespace kpqg::metrics {

inline constexpr int kMaxOrder = 4;
inline constexpr double kRougeBeta = 1.2;

// Sufficient statistics of one (candidate, reference) pair. Tokens are
// lowercased before any matching.
struct PairStats {
  std::array<std::size_t, kMaxOrder> matches{};      // clipped n-gram matches
  std::array<std::size_t, kMaxOrder> totals{};       // candidate n-grams
  std::array<std::size_t, kMaxOrder> ref_totals{};   // reference n-grams
  std::size_t cand_len = 0;
  std::size_t ref_len = 0;
  double rouge_l = 0.0;  // [0,1]
  double meteor = 0.0;   // [0,1]

  friend bool operator==(const PairStats&, const PairStats&) = default;
};

PairStats pair_stats(const TokenSeq& candidate, const TokenSeq& reference);

/// Per-pair statistics computed in parallel (OpenMP); index i is pair i.
std::vector<PairStats> corpus_stats(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references);

/// Serial reference for corpus_stats.
std::vector<PairStats> corpus_stats_serial(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references);

/// Corpus BLEU (0-100) without smoothing: clipped precisions summed over the
/// corpus, geometric mean over orders 1..max_n, brevity penalty exp(1 - r/c)
/// when c < r. Orders for which neither side has any n-gram are dropped
/// (short identical corpora still score 100).
double bleu_from_stats(std::span<const PairStats> stats, int max_n);

double bleu(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references, int max_n);
double rouge_l(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references);
double meteor_lite(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// LCS F-measure with recall weighted by beta (1.2 by default), in [0,1].
double rouge_l_pair(std::span<const std::string> candidate, std::span<const std::string> reference,
                    double beta = kRougeBeta);

struct Alignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

// Unigram alignment in two stages, exact then stemmed. Each candidate token
// takes the reference slot following its predecessor's match when eligible,
// otherwise the leftmost free slot.
Alignment meteor_align(std::span<const std::string> candidate, std::span<const std::string> reference);

/// F_mean * (1 - 0.5 * (chunks/matches)^3) with F_mean = 10PR / (R + 9P).
double meteor_pair(std::span<const std::string> candidate, std::span<const std::string> reference);

/// Light suffix-stripping stemmer (plural, -ing, -ed, -ly).
std::string stem(std::string_view word);

struct MetricsReport {
  double bleu1 = 0, bleu2 = 0, bleu3 = 0, bleu4 = 0;
  double rouge_l = 0;
  double meteor = 0;
  std::size_t n_pairs = 0;
};

MetricsReport report_from_stats(std::span<const PairStats> stats);
MetricsReport score_corpus(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references);

/// One question per line in each file. Throws FileMissing / LengthMismatch.
MetricsReport evaluate_corpus(const std::filesystem::path& pred_file, const std::filesystem::path& ref_file);

std::vector<std::string> read_lines(const std::filesystem::path& path);

// Column order: BLEU 1, BLEU 2, BLEU 3, BLEU 4, ROUGE-L, METEOR.
std::string render_header();
std::string render_row(std::string_view label, const MetricsReport& report);
std::string report_json(const MetricsReport& report);

}  // namespace kpqg::metrics
