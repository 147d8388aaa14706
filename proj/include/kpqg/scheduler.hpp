#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "kpqg/maskfill.hpp"
#include "kpqg/text.hpp"

namespace kpqg {

enum class Origin { Keyword, Generated };

struct PlacedToken {
  Token token;
  Origin origin = Origin::Generated;
  std::optional<std::size_t> phrase_id;  // set for keyword tokens

  friend bool operator==(const PlacedToken&, const PlacedToken&) = default;
};

enum class GapState { Open, Sealed };

// Gap i sits immediately before placed[i]; the last gap trails the sequence.
// Invariant: gaps.size() == placed.size() + 1.
struct DecodeState {
  TokenSeq context;
  TokenSeq answer;
  std::vector<PlacedToken> placed;
  std::vector<GapState> gaps{GapState::Open};
  std::size_t iteration = 0;
  bool truncated = false;

  bool complete() const;
  std::size_t open_gaps() const;
  TokenSeq question() const;
  std::size_t generated_count() const;
};

struct DecodeLimits {
  std::size_t max_new_tokens = 48;
  std::size_t max_iterations = 32;
};

struct TraceStep {
  TokenSeq input;
  std::vector<std::size_t> mask_positions;
  TokenSeq predictions;
};

struct GenerationResult {
  TokenSeq question;
  std::vector<TraceStep> trace;
  bool truncated = false;
};

/// C [S] A [S], the shared input prefix of every view.
TokenSeq context_prefix(const TokenSeq& context, const TokenSeq& answer);

/// Places keyword phrases in order. Gaps between phrases and at both ends are
/// Open; gaps inside a multi-token phrase start Sealed.
DecodeState init_state(TokenSeq context, TokenSeq answer, const std::vector<TokenSeq>& keywords);

/// One [M] per Open gap. Throws AlreadyComplete when every gap is Sealed.
FillRequest masked_view(const DecodeState& state);

/// Applies one prediction per Open gap, left to right: [S] seals the gap, a
/// Word is inserted as Generated and splits the gap into two Open gaps.
/// Throws LengthMismatch when the response does not match the Open gap count.
DecodeState apply_predictions(const DecodeState& state, const FillResponse& response);

DecodeState force_seal(DecodeState state);

/// Insertion decoding. On a limit trip the remaining gaps are force-sealed
/// and the result is flagged truncated.
GenerationResult decode(const TokenSeq& context, const TokenSeq& answer, const std::vector<TokenSeq>& keywords,
                        const MaskFiller& filler, DecodeLimits limits = {});

/// Left-to-right decoding over C [S] A [S] q1 [S] ... qk [S] [M], one token
/// per step, stopping on [S] or after max_new_tokens.
GenerationResult decode_autoregressive(const TokenSeq& context, const TokenSeq& answer, const MaskFiller& filler,
                                       DecodeLimits limits = {});

}  // namespace kpqg
