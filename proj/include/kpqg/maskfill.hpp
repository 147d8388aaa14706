#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kpqg/text.hpp"

namespace kpqg {

struct FillRequest {
  TokenSeq sequence;
  std::vector<std::size_t> mask_positions;

  /// Builds a request whose mask_positions enumerate the Mask tokens of seq.
  static FillRequest from_sequence(TokenSeq seq);

  // Throws InvalidArgument unless mask_positions exactly lists the masks.
  void validate() const;
};

struct FillResponse {
  TokenSeq predictions;
};

/// Index of the first token after the context/answer prefix (the position
/// following the second [S]), or 0 when the sequence has fewer than two.
std::size_t question_region_start(std::span<const Token> seq);

/// The masked-LM contract. Implementations are immutable after construction
/// and fill() may be called from several threads at once. All masks of one
/// request are predicted from the same frozen input.
class MaskFiller {
 public:
  virtual ~MaskFiller() = default;
  virtual FillResponse fill(const FillRequest& request) const = 0;
  virtual std::string name() const = 0;
};

/// Calls filler.fill and checks the response shape (one Word or [S] per mask).
FillResponse checked_fill(const MaskFiller& filler, const FillRequest& request);

inline constexpr std::size_t kAlwaysSeal = std::numeric_limits<std::size_t>::max();

// Deterministic bigram filler for desk-scale runs. Each mask is scored from
// its nearest Word neighbours in the question region: a candidate w between
// L and R scores min(count(L,w), count(w,R)); with one neighbour only that
// bigram counts; with none, w's unigram frequency. The best candidate wins
// (lexicographically smallest on ties) unless its score is below
// sep_threshold, in which case [S] is emitted.
class ToyFiller final : public MaskFiller {
 public:
  using CountTable = std::map<std::string, std::map<std::string, std::size_t>>;

  ToyFiller(CountTable forward, std::map<std::string, std::size_t> unigrams, std::size_t sep_threshold);

  FillResponse fill(const FillRequest& request) const override;
  std::string name() const override { return "toy"; }

  std::size_t bigram_count(const std::string& left, const std::string& right) const;
  std::size_t sep_threshold() const { return sep_threshold_; }

 private:
  Token predict(std::span<const Token> seq, std::size_t region_start, std::size_t pos) const;

  CountTable forward_;   // left -> right -> count
  CountTable backward_;  // right -> left -> count
  std::map<std::string, std::size_t> unigrams_;
  std::size_t sep_threshold_;
};

/// Tabulates adjacent Word bigrams over the corpus. Throws EmptyCorpus.
ToyFiller fit_toy(std::span<const TokenSeq> corpus, std::size_t sep_threshold);

// Replays fixture predictions keyed by the question region of the view
// (space-joined tokens after the context/answer prefix).
class ScriptedFiller final : public MaskFiller {
 public:
  struct Step {
    std::string view;
    TokenSeq predictions;
  };

  explicit ScriptedFiller(std::vector<Step> steps, std::optional<Token> fallback = std::nullopt);

  // Fixture JSON: {"steps": [{"view": "...", "predictions": [...]}], "fallback": "[S]"}
  static ScriptedFiller load(const std::filesystem::path& path);

  FillResponse fill(const FillRequest& request) const override;
  std::string name() const override { return "scripted"; }

  static std::string view_key(std::span<const Token> seq);

 private:
  std::map<std::string, TokenSeq> steps_;
  std::optional<Token> fallback_;
};

/// Client for the JSON fill protocol: POST {base_url}/fill.
class RemoteFiller final : public MaskFiller {
 public:
  explicit RemoteFiller(std::string base_url, int timeout_seconds = 30);

  /// Reads KPQG_REMOTE_URL; throws RemoteUnavailable if unset.
  static RemoteFiller from_env();

  FillResponse fill(const FillRequest& request) const override;
  std::string name() const override { return "remote"; }

  const std::string& base_url() const { return base_url_; }

 private:
  std::string base_url_;
  int timeout_seconds_;
};

}  // namespace kpqg
