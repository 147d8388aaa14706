#include "kpqg/maskfill.hpp"

#include <fstream>

#include <json.hpp>

#include "http_post.hpp"
#include "kpqg/error.hpp"

namespace kpqg {

using nlohmann::json;
using nlohmann::ordered_json;

FillRequest FillRequest::from_sequence(TokenSeq seq) {
  FillRequest req;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i].kind == TokenKind::Mask) req.mask_positions.push_back(i);
  }
  req.sequence = std::move(seq);
  return req;
}

void FillRequest::validate() const {
  std::size_t next = 0;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (sequence[i].kind != TokenKind::Mask) continue;
    if (next >= mask_positions.size() || mask_positions[next] != i) {
      throw Error(ErrorCode::InvalidArgument, "mask_positions does not enumerate the masks of the sequence");
    }
    ++next;
  }
  if (next != mask_positions.size() || next == 0) {
    throw Error(ErrorCode::InvalidArgument, "fill request needs mask_positions matching at least one mask");
  }
}

std::size_t question_region_start(std::span<const Token> seq) {
  int seps = 0;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (seq[i].kind == TokenKind::Sep && ++seps == 2) return i + 1;
  }
  return 0;
}

FillResponse checked_fill(const MaskFiller& filler, const FillRequest& request) {
  auto response = filler.fill(request);
  if (response.predictions.size() != request.mask_positions.size()) {
    throw Error(ErrorCode::LengthMismatch,
                filler.name() + " returned " + std::to_string(response.predictions.size()) + " predictions for " +
                    std::to_string(request.mask_positions.size()) + " masks");
  }
  for (const auto& p : response.predictions) {
    if (p.kind == TokenKind::Mask || p.kind == TokenKind::Pad) {
      throw Error(ErrorCode::LengthMismatch, filler.name() + " predicted a " + p.text + " token");
    }
  }
  return response;
}

// ---------------------------------------------------------------------------
// ToyFiller

ToyFiller::ToyFiller(CountTable forward, std::map<std::string, std::size_t> unigrams, std::size_t sep_threshold)
    : forward_(std::move(forward)), unigrams_(std::move(unigrams)), sep_threshold_(sep_threshold) {
  for (const auto& [left, row] : forward_) {
    for (const auto& [right, count] : row) backward_[right][left] = count;
  }
}

std::size_t ToyFiller::bigram_count(const std::string& left, const std::string& right) const {
  auto row = forward_.find(left);
  if (row == forward_.end()) return 0;
  auto cell = row->second.find(right);
  return cell == row->second.end() ? 0 : cell->second;
}

Token ToyFiller::predict(std::span<const Token> seq, std::size_t region_start, std::size_t pos) const {
  const Token* left = nullptr;
  for (std::size_t i = pos; i > region_start; --i) {
    const auto& t = seq[i - 1];
    if (t.is_word()) { left = &t; break; }
    if (t.kind != TokenKind::Sep) break;
  }
  const Token* right = nullptr;
  for (std::size_t i = pos + 1; i < seq.size(); ++i) {
    const auto& t = seq[i];
    if (t.is_word()) { right = &t; break; }
    if (t.kind != TokenKind::Sep) break;
  }

  const std::string* best = nullptr;
  std::size_t best_score = 0;
  auto consider = [&](const std::string& w, std::size_t score) {
    if (score > best_score) {
      best = &w;
      best_score = score;
    }
  };

  if (left != nullptr) {
    auto row = forward_.find(left->text);
    if (row != forward_.end()) {
      for (const auto& [w, count] : row->second) {
        std::size_t score = count;
        if (right != nullptr) score = std::min(score, bigram_count(w, right->text));
        consider(w, score);
      }
    }
  } else if (right != nullptr) {
    auto col = backward_.find(right->text);
    if (col != backward_.end()) {
      for (const auto& [w, count] : col->second) consider(w, count);
    }
  } else {
    for (const auto& [w, count] : unigrams_) consider(w, count);
  }

  if (best == nullptr || best_score < sep_threshold_) return Token::sep();
  return Token{*best, TokenKind::Word};
}

FillResponse ToyFiller::fill(const FillRequest& request) const {
  request.validate();
  auto region = question_region_start(request.sequence);
  FillResponse out;
  out.predictions.reserve(request.mask_positions.size());
  for (auto pos : request.mask_positions) out.predictions.push_back(predict(request.sequence, region, pos));
  return out;
}

ToyFiller fit_toy(std::span<const TokenSeq> corpus, std::size_t sep_threshold) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyCorpus, "toy filler needs a non-empty corpus");
  ToyFiller::CountTable forward;
  std::map<std::string, std::size_t> unigrams;
  for (const auto& seq : corpus) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      if (!seq[i].is_word()) continue;
      ++unigrams[seq[i].text];
      if (i + 1 < seq.size() && seq[i + 1].is_word()) ++forward[seq[i].text][seq[i + 1].text];
    }
  }
  return ToyFiller(std::move(forward), std::move(unigrams), sep_threshold);
}

// ---------------------------------------------------------------------------
// ScriptedFiller

ScriptedFiller::ScriptedFiller(std::vector<Step> steps, std::optional<Token> fallback)
    : fallback_(std::move(fallback)) {
  for (auto& s : steps) steps_.insert_or_assign(std::move(s.view), std::move(s.predictions));
}

std::string ScriptedFiller::view_key(std::span<const Token> seq) {
  return join_tokens(seq.subspan(question_region_start(seq)));
}

ScriptedFiller ScriptedFiller::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileMissing, "cannot open script " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "bad script " + path.string() + ": " + e.what());
  }
  std::vector<Step> steps;
  for (const auto& s : doc.value("steps", json::array())) {
    steps.push_back({s.at("view").get<std::string>(), from_texts(s.at("predictions").get<std::vector<std::string>>())});
  }
  std::optional<Token> fallback;
  if (doc.contains("fallback")) fallback = Token::parse(doc["fallback"].get<std::string>());
  return ScriptedFiller(std::move(steps), std::move(fallback));
}

FillResponse ScriptedFiller::fill(const FillRequest& request) const {
  request.validate();
  auto key = view_key(request.sequence);
  auto it = steps_.find(key);
  if (it != steps_.end()) {
    if (it->second.size() != request.mask_positions.size()) {
      throw Error(ErrorCode::ScriptExhausted, "script entry for '" + key + "' has the wrong prediction count");
    }
    return {it->second};
  }
  if (fallback_) return {TokenSeq(request.mask_positions.size(), *fallback_)};
  throw Error(ErrorCode::ScriptExhausted, "no scripted predictions for view '" + key + "'");
}

// ---------------------------------------------------------------------------
// RemoteFiller

RemoteFiller::RemoteFiller(std::string base_url, int timeout_seconds)
    : base_url_(std::move(base_url)), timeout_seconds_(timeout_seconds) {}

RemoteFiller RemoteFiller::from_env() {
  auto url = detail::env("KPQG_REMOTE_URL");
  if (!url) throw Error(ErrorCode::RemoteUnavailable, "KPQG_REMOTE_URL is not set");
  return RemoteFiller(*url);
}

FillResponse RemoteFiller::fill(const FillRequest& request) const {
  request.validate();
  ordered_json body;
  body["tokens"] = texts(request.sequence);
  body["mask_positions"] = request.mask_positions;
  auto text = detail::post_json(base_url_, "/fill", body.dump(), timeout_seconds_, ErrorCode::RemoteUnavailable);
  try {
    auto doc = json::parse(text);
    FillResponse out;
    for (const auto& p : doc.at("predictions")) out.predictions.push_back(Token::parse(p.get<std::string>()));
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::RemoteUnavailable, std::string("malformed fill response: ") + e.what());
  } catch (const Error& e) {
    throw Error(ErrorCode::RemoteUnavailable, std::string("malformed fill response: ") + e.what());
  }
}

}  // namespace kpqg
