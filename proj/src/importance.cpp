#include "kpqg/importance.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

#include "http_post.hpp"
#include "kpqg/error.hpp"

namespace kpqg {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

double checked_confidence(double c, const std::string& who) {
  if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
    throw Error(ErrorCode::ScorerFailure, who + " scorer returned confidence outside [0,1]: " + std::to_string(c));
  }
  return c;
}

void require_question(const TokenSeq& question) {
  if (question.empty()) throw Error(ErrorCode::EmptyQuestion, "importance needs a non-empty question");
}

}  // namespace

ScriptedScorer::ScriptedScorer(std::vector<double> by_pad_position, std::map<std::string, double> table,
                               std::optional<double> fallback)
    : by_pad_position_(std::move(by_pad_position)), table_(std::move(table)), fallback_(fallback) {}

ScriptedScorer ScriptedScorer::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileMissing, "cannot open scorer fixture " + path.string());
  try {
    auto doc = json::parse(in);
    std::optional<double> fallback;
    if (doc.contains("default")) fallback = doc["default"].get<double>();
    return ScriptedScorer(doc.value("confidences", std::vector<double>{}),
                          doc.value("table", std::map<std::string, double>{}), fallback);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, "bad scorer fixture " + path.string() + ": " + e.what());
  }
}

double ScriptedScorer::score(const TokenSeq&, const TokenSeq& question, const TokenSeq&) const {
  if (auto it = table_.find(join_tokens(question)); it != table_.end()) return it->second;
  auto pad = std::find_if(question.begin(), question.end(), [](const Token& t) { return t.kind == TokenKind::Pad; });
  if (pad != question.end()) {
    auto pos = static_cast<std::size_t>(pad - question.begin());
    if (pos < by_pad_position_.size()) return by_pad_position_[pos];
  }
  if (fallback_) return *fallback_;
  throw Error(ErrorCode::ScorerFailure, "scripted scorer has no entry for '" + join_tokens(question) + "'");
}

double OverlapScorer::score(const TokenSeq& context, const TokenSeq& question, const TokenSeq& answer) const {
  std::set<std::string> seen;
  for (const auto& t : context) seen.insert(to_lower(t.text));
  for (const auto& t : answer) seen.insert(to_lower(t.text));
  std::size_t overlap = 0;
  for (const auto& t : question) {
    if (t.is_word() && seen.count(to_lower(t.text)) > 0) ++overlap;
  }
  return static_cast<double>(1 + overlap) / static_cast<double>(2 + question.size());
}

RemoteScorer::RemoteScorer(std::string base_url, int timeout_seconds)
    : base_url_(std::move(base_url)), timeout_seconds_(timeout_seconds) {}

RemoteScorer RemoteScorer::from_env() {
  auto url = detail::env("KPQG_SCORER_URL");
  if (!url) throw Error(ErrorCode::ScorerFailure, "KPQG_SCORER_URL is not set");
  return RemoteScorer(*url);
}

double RemoteScorer::score(const TokenSeq& context, const TokenSeq& question, const TokenSeq& answer) const {
  ordered_json body;
  body["context"] = texts(context);
  body["question"] = texts(question);
  body["answer"] = texts(answer);
  auto text = detail::post_json(base_url_, "/score", body.dump(), timeout_seconds_, ErrorCode::ScorerFailure);
  try {
    return checked_confidence(json::parse(text).at("confidence").get<double>(), "remote");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ScorerFailure, std::string("malformed score response: ") + e.what());
  }
}

std::vector<TokenSeq> padded_variants(const TokenSeq& question) {
  require_question(question);
  std::vector<TokenSeq> out(question.size(), question);
  for (std::size_t i = 0; i < question.size(); ++i) out[i][i] = Token::pad();
  return out;
}

ImportanceRanking ranking_from_confidences(std::vector<double> confidences) {
  ImportanceRanking r;
  r.order.resize(confidences.size());
  std::iota(r.order.begin(), r.order.end(), std::size_t{0});
  std::stable_sort(r.order.begin(), r.order.end(),
                   [&](std::size_t a, std::size_t b) { return confidences[a] < confidences[b]; });
  r.confidences = std::move(confidences);
  return r;
}

ImportanceRanking rank_importance_serial(const TokenSeq& context, const TokenSeq& answer, const TokenSeq& question,
                                         const AnswerScorer& scorer) {
  auto variants = padded_variants(question);
  std::vector<double> conf(variants.size());
  for (std::size_t i = 0; i < variants.size(); ++i) {
    conf[i] = checked_confidence(scorer.score(context, variants[i], answer), scorer.name());
  }
  return ranking_from_confidences(std::move(conf));
}

ImportanceRanking rank_importance(const TokenSeq& context, const TokenSeq& answer, const TokenSeq& question,
                                  const AnswerScorer& scorer) {
  auto variants = padded_variants(question);
  const auto n = static_cast<std::ptrdiff_t>(variants.size());
  std::vector<double> conf(variants.size());
  std::vector<std::exception_ptr> errors(variants.size());

#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      conf[i] = checked_confidence(scorer.score(context, variants[i], answer), scorer.name());
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return ranking_from_confidences(std::move(conf));
}

bool is_permutation_of_indices(const std::vector<std::size_t>& order, std::size_t n) {
  if (order.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (auto i : order) {
    if (i >= n || seen[i]) return false;
    seen[i] = true;
  }
  return true;
}

}  // namespace kpqg
