#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kpqg/text.hpp"

namespace kpqg {

/// QA confidence in the gold answer, in [0,1]. Deterministic for identical
/// inputs and safe to call concurrently.
class AnswerScorer {
 public:
  virtual ~AnswerScorer() = default;
  virtual double score(const TokenSeq& context, const TokenSeq& question, const TokenSeq& answer) const = 0;
  virtual std::string name() const = 0;
};

// Fixture scorer. Lookup order: exact table entry for the space-joined
// question, then the per-position confidence of the [PAD] slot, then the
// default. Missing all three throws ScorerFailure.
class ScriptedScorer final : public AnswerScorer {
 public:
  ScriptedScorer(std::vector<double> by_pad_position, std::map<std::string, double> table = {},
                 std::optional<double> fallback = std::nullopt);

  // {"confidences": [...], "table": {"how [PAD] ...": 0.3}, "default": 1.0}
  static ScriptedScorer load(const std::filesystem::path& path);

  double score(const TokenSeq& context, const TokenSeq& question, const TokenSeq& answer) const override;
  std::string name() const override { return "scripted"; }

 private:
  std::vector<double> by_pad_position_;
  std::map<std::string, double> table_;
  std::optional<double> fallback_;
};

// Lexical stand-in for a QA model: confidence grows with the number of
// (unpadded, lowercased) question tokens that also occur in the context or
// answer, (1 + overlap) / (2 + |Q|).
class OverlapScorer final : public AnswerScorer {
 public:
  double score(const TokenSeq& context, const TokenSeq& question, const TokenSeq& answer) const override;
  std::string name() const override { return "overlap"; }
};

/// Client for POST {base_url}/score.
class RemoteScorer final : public AnswerScorer {
 public:
  explicit RemoteScorer(std::string base_url, int timeout_seconds = 30);
  static RemoteScorer from_env();  // KPQG_SCORER_URL

  double score(const TokenSeq& context, const TokenSeq& question, const TokenSeq& answer) const override;
  std::string name() const override { return "remote"; }

 private:
  std::string base_url_;
  int timeout_seconds_;
};

struct ImportanceRanking {
  std::vector<std::size_t> order;   // most important first
  std::vector<double> confidences;  // indexed by question position

  friend bool operator==(const ImportanceRanking&, const ImportanceRanking&) = default;
};

/// Variant i is the question with position i replaced by [PAD].
std::vector<TokenSeq> padded_variants(const TokenSeq& question);

/// Orders positions by ascending confidence, leftmost first on ties.
ImportanceRanking ranking_from_confidences(std::vector<double> confidences);

/// Pad-ablation ranking. The |Q| scorer calls run in parallel (OpenMP).
ImportanceRanking rank_importance(const TokenSeq& context, const TokenSeq& answer, const TokenSeq& question,
                                  const AnswerScorer& scorer);

/// Serial reference for rank_importance.
ImportanceRanking rank_importance_serial(const TokenSeq& context, const TokenSeq& answer, const TokenSeq& question,
                                         const AnswerScorer& scorer);

bool is_permutation_of_indices(const std::vector<std::size_t>& order, std::size_t n);

}  // namespace kpqg
