#include "kpqg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include <json.hpp>

#include "kpqg/error.hpp"

namespace kpqg::metrics {

namespace {

std::vector<std::string> lowered(const TokenSeq& seq) {
  std::vector<std::string> out;
  out.reserve(seq.size());
  for (const auto& t : seq) out.push_back(to_lower(t.text));
  return out;
}

std::map<std::string, std::size_t> ngram_counts(const std::vector<std::string>& toks, std::size_t n) {
  std::map<std::string, std::size_t> counts;
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    std::string key = toks[i];
    for (std::size_t k = 1; k < n; ++k) {
      key.push_back('\x1f');
      key += toks[i + k];
    }
    ++counts[key];
  }
  return counts;
}

void check_corpus(std::size_t candidates, std::size_t references) {
  if (candidates != references) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(candidates) + " candidates vs " + std::to_string(references) +
                                               " references");
  }
  if (candidates == 0) throw Error(ErrorCode::EmptyCorpus, "metrics need at least one pair");
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string stem(std::string_view word) {
  std::string w = to_lower(word);
  auto strip = [&](std::string_view suffix, std::string_view replacement, std::size_t min_rest) {
    if (!ends_with(w, suffix) || w.size() - suffix.size() < min_rest) return false;
    w.resize(w.size() - suffix.size());
    w += replacement;
    return true;
  };
  if (strip("sses", "ss", 2) || strip("ies", "y", 2)) return w;
  if (strip("ing", "", 3) || strip("ed", "", 3) || strip("ly", "", 3)) {
    // stopp -> stop
    if (w.size() >= 2 && w[w.size() - 1] == w[w.size() - 2] && std::string_view("lsz").find(w.back()) == std::string_view::npos) {
      w.pop_back();
    }
    return w;
  }
  if (ends_with(w, "ches") || ends_with(w, "shes") || ends_with(w, "xes") || ends_with(w, "zes")) {
    strip("es", "", 3);
    return w;
  }
  if (!ends_with(w, "ss") && !ends_with(w, "us")) strip("s", "", 3);
  return w;
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l_pair(std::span<const std::string> candidate, std::span<const std::string> reference, double beta) {
  if (candidate.empty() && reference.empty()) return 1.0;
  auto lcs = lcs_length(candidate, reference);
  if (lcs == 0) return 0.0;
  double p = static_cast<double>(lcs) / static_cast<double>(candidate.size());
  double r = static_cast<double>(lcs) / static_cast<double>(reference.size());
  double b2 = beta * beta;
  return (1.0 + b2) * r * p / (r + b2 * p);
}

Alignment meteor_align(std::span<const std::string> candidate, std::span<const std::string> reference) {
  constexpr auto kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> link(candidate.size(), kNone);
  std::vector<bool> used(reference.size(), false);

  std::vector<std::string> cand_stems, ref_stems;
  for (const auto& t : candidate) cand_stems.push_back(stem(t));
  for (const auto& t : reference) ref_stems.push_back(stem(t));

  auto run_stage = [&](const std::vector<std::string>& cand, const std::vector<std::string>& ref) {
    for (std::size_t i = 0; i < cand.size(); ++i) {
      if (link[i] != kNone) continue;
      std::size_t pick = kNone;
      if (i > 0 && link[i - 1] != kNone) {
        auto next = link[i - 1] + 1;
        if (next < ref.size() && !used[next] && ref[next] == cand[i]) pick = next;
      }
      for (std::size_t j = 0; pick == kNone && j < ref.size(); ++j) {
        if (!used[j] && ref[j] == cand[i]) pick = j;
      }
      if (pick != kNone) {
        link[i] = pick;
        used[pick] = true;
      }
    }
  };
  run_stage(std::vector<std::string>(candidate.begin(), candidate.end()),
            std::vector<std::string>(reference.begin(), reference.end()));
  run_stage(cand_stems, ref_stems);

  Alignment a;
  std::size_t prev_i = kNone, prev_j = kNone;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    if (link[i] == kNone) continue;
    ++a.matches;
    bool continues = prev_i != kNone && prev_i + 1 == i && prev_j + 1 == link[i];
    if (!continues) ++a.chunks;
    prev_i = i;
    prev_j = link[i];
  }
  return a;
}

double meteor_pair(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (candidate.empty() && reference.empty()) return 1.0;
  auto a = meteor_align(candidate, reference);
  if (a.matches == 0) return 0.0;
  double m = static_cast<double>(a.matches);
  double p = m / static_cast<double>(candidate.size());
  double r = m / static_cast<double>(reference.size());
  double f_mean = 10.0 * p * r / (r + 9.0 * p);
  double frag = static_cast<double>(a.chunks) / m;
  double penalty = 0.5 * frag * frag * frag;
  return f_mean * (1.0 - penalty);
}

PairStats pair_stats(const TokenSeq& candidate, const TokenSeq& reference) {
  auto cand = lowered(candidate);
  auto ref = lowered(reference);
  PairStats s;
  s.cand_len = cand.size();
  s.ref_len = ref.size();
  for (std::size_t n = 1; n <= kMaxOrder; ++n) {
    auto c = ngram_counts(cand, n);
    auto r = ngram_counts(ref, n);
    s.totals[n - 1] = cand.size() >= n ? cand.size() - n + 1 : 0;
    s.ref_totals[n - 1] = ref.size() >= n ? ref.size() - n + 1 : 0;
    for (const auto& [gram, count] : c) {
      auto it = r.find(gram);
      if (it != r.end()) s.matches[n - 1] += std::min(count, it->second);
    }
  }
  s.rouge_l = rouge_l_pair(cand, ref);
  s.meteor = meteor_pair(cand, ref);
  return s;
}

std::vector<PairStats> corpus_stats_serial(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references) {
  check_corpus(candidates.size(), references.size());
  std::vector<PairStats> out(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) out[i] = pair_stats(candidates[i], references[i]);
  return out;
}

std::vector<PairStats> corpus_stats(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references) {
  check_corpus(candidates.size(), references.size());
  std::vector<PairStats> out(candidates.size());
  const auto n = static_cast<std::ptrdiff_t>(candidates.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = pair_stats(candidates[i], references[i]);
  return out;
}

double bleu_from_stats(std::span<const PairStats> stats, int max_n) {
  if (max_n < 1 || max_n > kMaxOrder) throw Error(ErrorCode::InvalidArgument, "BLEU order must be in 1..4");
  if (stats.empty()) throw Error(ErrorCode::EmptyCorpus, "metrics need at least one pair");
  std::size_t c = 0, r = 0;
  std::array<std::size_t, kMaxOrder> matches{}, totals{}, ref_totals{};
  // Summed in index order so parallel and serial stats aggregate identically.
  for (const auto& s : stats) {
    c += s.cand_len;
    r += s.ref_len;
    for (int n = 0; n < kMaxOrder; ++n) {
      matches[n] += s.matches[n];
      totals[n] += s.totals[n];
      ref_totals[n] += s.ref_totals[n];
    }
  }
  if (c == 0) return r == 0 ? 100.0 : 0.0;

  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < max_n; ++n) {
    if (totals[n] == 0) {
      if (ref_totals[n] == 0) break;
      return 0.0;
    }
    if (matches[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matches[n]) / static_cast<double>(totals[n]));
    ++orders;
  }
  double bp = c < r ? std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c)) : 1.0;
  return 100.0 * bp * std::exp(log_sum / orders);
}

MetricsReport report_from_stats(std::span<const PairStats> stats) {
  MetricsReport rep;
  rep.n_pairs = stats.size();
  rep.bleu1 = bleu_from_stats(stats, 1);
  rep.bleu2 = bleu_from_stats(stats, 2);
  rep.bleu3 = bleu_from_stats(stats, 3);
  rep.bleu4 = bleu_from_stats(stats, 4);
  double rouge = 0.0, meteor = 0.0;
  for (const auto& s : stats) {
    rouge += s.rouge_l;
    meteor += s.meteor;
  }
  rep.rouge_l = 100.0 * rouge / static_cast<double>(stats.size());
  rep.meteor = 100.0 * meteor / static_cast<double>(stats.size());
  return rep;
}

double bleu(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references, int max_n) {
  return bleu_from_stats(corpus_stats(candidates, references), max_n);
}

double rouge_l(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references) {
  return report_from_stats(corpus_stats(candidates, references)).rouge_l;
}

double meteor_lite(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references) {
  return report_from_stats(corpus_stats(candidates, references)).meteor;
}

MetricsReport score_corpus(std::span<const TokenSeq> candidates, std::span<const TokenSeq> references) {
  return report_from_stats(corpus_stats(candidates, references));
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::FileMissing, "cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

MetricsReport evaluate_corpus(const std::filesystem::path& pred_file, const std::filesystem::path& ref_file) {
  auto preds = read_lines(pred_file);
  auto refs = read_lines(ref_file);
  if (preds.size() != refs.size()) {
    throw Error(ErrorCode::LengthMismatch, pred_file.string() + " has " + std::to_string(preds.size()) + " lines, " +
                                               ref_file.string() + " has " + std::to_string(refs.size()));
  }
  std::vector<TokenSeq> cands, references;
  for (const auto& l : preds) cands.push_back(tokenize(l));
  for (const auto& l : refs) references.push_back(tokenize(l));
  return score_corpus(cands, references);
}

std::string render_header() {
  char buf[160];
  std::snprintf(buf, sizeof buf, "| %-12s | %7s | %7s | %7s | %7s | %7s | %7s |", "Model", "BLEU 1", "BLEU 2", "BLEU 3",
                "BLEU 4", "ROUGE-L", "METEOR");
  return buf;
}

std::string render_row(std::string_view label, const MetricsReport& r) {
  std::string name(label);
  char buf[200];
  std::snprintf(buf, sizeof buf, "| %-12s | %7.2f | %7.2f | %7.2f | %7.2f | %7.2f | %7.2f |", name.c_str(), r.bleu1, r.bleu2, r.bleu3, r.bleu4, r.rouge_l, r.meteor);
  return buf;
}

std::string report_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["bleu1"] = r.bleu1;
  j["bleu2"] = r.bleu2;
  j["bleu3"] = r.bleu3;
  j["bleu4"] = r.bleu4;
  j["rouge_l"] = r.rouge_l;
  j["meteor"] = r.meteor;
  j["n_pairs"] = r.n_pairs;
  return j.dump();
}

}  // namespace kpqg::metrics
