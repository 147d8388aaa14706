#include "kpqg/scheduler.hpp"

#include <algorithm>

#include "kpqg/error.hpp"

namespace kpqg {

bool DecodeState::complete() const {
  return std::all_of(gaps.begin(), gaps.end(), [](GapState g) { return g == GapState::Sealed; });
}

std::size_t DecodeState::open_gaps() const {
  return static_cast<std::size_t>(std::count(gaps.begin(), gaps.end(), GapState::Open));
}

TokenSeq DecodeState::question() const {
  TokenSeq out;
  out.reserve(placed.size());
  for (const auto& p : placed) out.push_back(p.token);
  return out;
}

std::size_t DecodeState::generated_count() const {
  return static_cast<std::size_t>(
      std::count_if(placed.begin(), placed.end(), [](const PlacedToken& p) { return p.origin == Origin::Generated; }));
}

TokenSeq context_prefix(const TokenSeq& context, const TokenSeq& answer) {
  TokenSeq out;
  out.reserve(context.size() + answer.size() + 2);
  out.insert(out.end(), context.begin(), context.end());
  out.push_back(Token::sep());
  out.insert(out.end(), answer.begin(), answer.end());
  out.push_back(Token::sep());
  return out;
}

DecodeState init_state(TokenSeq context, TokenSeq answer, const std::vector<TokenSeq>& keywords) {
  DecodeState state;
  state.context = std::move(context);
  state.answer = std::move(answer);
  state.gaps.clear();
  state.gaps.push_back(GapState::Open);
  for (std::size_t phrase = 0; phrase < keywords.size(); ++phrase) {
    const auto& kw = keywords[phrase];
    for (std::size_t i = 0; i < kw.size(); ++i) {
      if (!kw[i].is_word()) {
        throw Error(ErrorCode::InvalidArgument, "keyword phrases may only contain words, got " + kw[i].text);
      }
      if (i > 0) state.gaps.back() = GapState::Sealed;
      state.placed.push_back({kw[i], Origin::Keyword, phrase});
      state.gaps.push_back(GapState::Open);
    }
  }
  return state;
}

FillRequest masked_view(const DecodeState& state) {
  if (state.complete()) throw Error(ErrorCode::AlreadyComplete, "every gap is sealed");
  auto seq = context_prefix(state.context, state.answer);
  seq.reserve(seq.size() + state.placed.size() + state.gaps.size());
  for (std::size_t i = 0; i < state.gaps.size(); ++i) {
    if (state.gaps[i] == GapState::Open) seq.push_back(Token::mask());
    if (i < state.placed.size()) seq.push_back(state.placed[i].token);
  }
  return FillRequest::from_sequence(std::move(seq));
}

DecodeState apply_predictions(const DecodeState& state, const FillResponse& response) {
  auto open = state.open_gaps();
  if (response.predictions.size() != open) {
    throw Error(ErrorCode::LengthMismatch, "expected " + std::to_string(open) + " predictions, got " +
                                               std::to_string(response.predictions.size()));
  }
  DecodeState next;
  next.context = state.context;
  next.answer = state.answer;
  next.iteration = state.iteration + 1;
  next.truncated = state.truncated;
  next.gaps.clear();
  next.placed.reserve(state.placed.size() + open);
  next.gaps.reserve(state.gaps.size() + open);

  std::size_t k = 0;
  for (std::size_t i = 0; i < state.gaps.size(); ++i) {
    if (state.gaps[i] == GapState::Sealed) {
      next.gaps.push_back(GapState::Sealed);
    } else {
      const auto& pred = response.predictions[k++];
      if (pred.kind == TokenKind::Sep) {
        next.gaps.push_back(GapState::Sealed);
      } else if (pred.is_word()) {
        next.gaps.push_back(GapState::Open);
        next.placed.push_back({pred, Origin::Generated, std::nullopt});
        next.gaps.push_back(GapState::Open);
      } else {
        throw Error(ErrorCode::InvalidArgument, "prediction must be a word or [S], got " + pred.text);
      }
    }
    if (i < state.placed.size()) next.placed.push_back(state.placed[i]);
  }
  return next;
}

DecodeState force_seal(DecodeState state) {
  std::fill(state.gaps.begin(), state.gaps.end(), GapState::Sealed);
  return state;
}

GenerationResult decode(const TokenSeq& context, const TokenSeq& answer, const std::vector<TokenSeq>& keywords,
                        const MaskFiller& filler, DecodeLimits limits) {
  if (limits.max_new_tokens == 0 || limits.max_iterations == 0) {
    throw Error(ErrorCode::InvalidArgument, "decode limits must be positive");
  }
  auto state = init_state(context, answer, keywords);
  GenerationResult result;
  while (!state.complete()) {
    if (state.iteration >= limits.max_iterations) {
      state.truncated = true;
      break;
    }
    auto request = masked_view(state);
    auto response = checked_fill(filler, request);
    result.trace.push_back({request.sequence, request.mask_positions, response.predictions});

    std::size_t budget = limits.max_new_tokens - std::min(limits.max_new_tokens, state.generated_count());
    auto words = static_cast<std::size_t>(std::count_if(response.predictions.begin(), response.predictions.end(),
                                                        [](const Token& t) { return t.is_word(); }));
    if (words > budget) {
      // Accept words left to right up to the budget; the rest seal.
      for (auto& p : response.predictions) {
        if (!p.is_word()) continue;
        if (budget == 0) p = Token::sep();
        else --budget;
      }
      state = apply_predictions(state, response);
      state.truncated = true;
      break;
    }
    state = apply_predictions(state, response);
  }
  if (state.truncated) state = force_seal(std::move(state));
  result.question = state.question();
  result.truncated = state.truncated;
  return result;
}

GenerationResult decode_autoregressive(const TokenSeq& context, const TokenSeq& answer, const MaskFiller& filler,
                                       DecodeLimits limits) {
  if (limits.max_new_tokens == 0) throw Error(ErrorCode::InvalidArgument, "decode limits must be positive");
  GenerationResult result;
  auto prefix = context_prefix(context, answer);
  for (;;) {
    if (result.question.size() >= limits.max_new_tokens) {
      result.truncated = true;
      break;
    }
    auto seq = prefix;
    for (const auto& q : result.question) {
      seq.push_back(q);
      seq.push_back(Token::sep());
    }
    seq.push_back(Token::mask());
    auto request = FillRequest::from_sequence(std::move(seq));
    auto response = checked_fill(filler, request);
    result.trace.push_back({request.sequence, request.mask_positions, response.predictions});
    const auto& next = response.predictions.front();
    if (!next.is_word()) break;
    result.question.push_back(next);
  }
  return result;
}

}  // namespace kpqg
