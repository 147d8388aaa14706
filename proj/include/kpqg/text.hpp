#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kpqg {

enum class TokenKind { Word, Sep, Mask, Pad };

inline constexpr std::string_view kSepMarker = "[S]";
inline constexpr std::string_view kMaskMarker = "[M]";
inline constexpr std::string_view kPadMarker = "[PAD]";

std::string_view marker_for(TokenKind kind);

struct Token {
  std::string text;
  TokenKind kind = TokenKind::Word;

  static Token word(std::string text);
  static Token sep() { return {std::string(kSepMarker), TokenKind::Sep}; }
  static Token mask() { return {std::string(kMaskMarker), TokenKind::Mask}; }
  static Token pad() { return {std::string(kPadMarker), TokenKind::Pad}; }

  // Parses a serialized token: marker spellings map to their kinds,
  // anything else becomes a Word.
  static Token parse(std::string_view text);

  bool is_word() const { return kind == TokenKind::Word; }

  friend bool operator==(const Token&, const Token&) = default;
};

using TokenSeq = std::vector<Token>;

/// Splits on whitespace and detaches the punctuation characters ? . , ! ' "
/// as their own Word tokens. Never produces marker tokens.
TokenSeq tokenize(std::string_view text);

/// Inverse of tokenize for Word-only sequences. Punctuation tokens attach to
/// the preceding token. Throws UnfinishedSequence if a marker is present.
std::string render(std::span<const Token> seq);

/// Space-joins token texts, markers included. Used for traces and fixtures.
std::string join_tokens(std::span<const Token> seq);

std::vector<std::string> texts(std::span<const Token> seq);
TokenSeq from_texts(const std::vector<std::string>& texts);

TokenSeq words(std::initializer_list<std::string_view> texts);

bool is_punct_char(char c);
std::string to_lower(std::string_view s);

}  // namespace kpqg
