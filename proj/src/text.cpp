#include "kpqg/text.hpp"

#include <algorithm>
#include <cctype>

#include "kpqg/error.hpp"

namespace kpqg {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_marker_text(std::string_view s) {
  return s == kSepMarker || s == kMaskMarker || s == kPadMarker;
}

void push_piece(TokenSeq& out, std::string piece) {
  if (piece.empty()) return;
  if (is_marker_text(piece)) {
    // Bracket characters split off so user text never aliases a marker.
    out.push_back(Token{"[", TokenKind::Word});
    out.push_back(Token{piece.substr(1, piece.size() - 2), TokenKind::Word});
    out.push_back(Token{"]", TokenKind::Word});
    return;
  }
  out.push_back(Token{std::move(piece), TokenKind::Word});
}

}  // namespace

std::string_view marker_for(TokenKind kind) {
  switch (kind) {
    case TokenKind::Sep: return kSepMarker;
    case TokenKind::Mask: return kMaskMarker;
    case TokenKind::Pad: return kPadMarker;
    case TokenKind::Word: break;
  }
  return {};
}

Token Token::word(std::string text) {
  if (text.empty() || std::any_of(text.begin(), text.end(), is_space)) {
    throw Error(ErrorCode::InvalidArgument, "word token must be non-empty and whitespace-free: '" + text + "'");
  }
  if (is_marker_text(text)) {
    throw Error(ErrorCode::InvalidArgument, "word token may not spell a marker: " + text);
  }
  return Token{std::move(text), TokenKind::Word};
}

Token Token::parse(std::string_view text) {
  if (text == kSepMarker) return sep();
  if (text == kMaskMarker) return mask();
  if (text == kPadMarker) return pad();
  return word(std::string(text));
}

bool is_punct_char(char c) {
  switch (c) {
    case '?': case '.': case ',': case '!': case '\'': case '"':
      return true;
    default:
      return false;
  }
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

TokenSeq tokenize(std::string_view text) {
  TokenSeq out;
  std::string piece;
  for (char c : text) {
    if (is_space(c)) {
      push_piece(out, std::move(piece));
      piece.clear();
    } else if (is_punct_char(c)) {
      push_piece(out, std::move(piece));
      piece.clear();
      out.push_back(Token{std::string(1, c), TokenKind::Word});
    } else {
      piece.push_back(c);
    }
  }
  push_piece(out, std::move(piece));
  return out;
}

std::string render(std::span<const Token> seq) {
  std::string out;
  for (const auto& tok : seq) {
    if (!tok.is_word()) {
      throw Error(ErrorCode::UnfinishedSequence, "cannot render marker " + tok.text);
    }
    bool attach = tok.text.size() == 1 && is_punct_char(tok.text[0]);
    if (!out.empty() && !attach) out.push_back(' ');
    out += tok.text;
  }
  return out;
}

std::string join_tokens(std::span<const Token> seq) {
  std::string out;
  for (const auto& tok : seq) {
    if (!out.empty()) out.push_back(' ');
    out += tok.text;
  }
  return out;
}

std::vector<std::string> texts(std::span<const Token> seq) {
  std::vector<std::string> out;
  out.reserve(seq.size());
  for (const auto& tok : seq) out.push_back(tok.text);
  return out;
}

TokenSeq from_texts(const std::vector<std::string>& texts) {
  TokenSeq out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(Token::parse(t));
  return out;
}

TokenSeq words(std::initializer_list<std::string_view> texts) {
  TokenSeq out;
  for (auto t : texts) out.push_back(Token::word(std::string(t)));
  return out;
}

}  // namespace kpqg
