#include "kpqg/instances.hpp"

#include <algorithm>
#include <optional>
#include <ostream>

#include <json.hpp>

#include "kpqg/error.hpp"
#include "kpqg/scheduler.hpp"

namespace kpqg {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

// Placed question positions (ascending) plus gap states; gap i precedes
// placed[i], the last gap trails.
struct Level {
  std::vector<std::size_t> placed;
  std::vector<GapState> gaps{GapState::Open};

  bool done() const {
    return std::all_of(gaps.begin(), gaps.end(), [](GapState g) { return g == GapState::Sealed; });
  }
};

TokenSeq view_of(const TokenSeq& prefix, const TokenSeq& question, const Level& level) {
  TokenSeq seq = prefix;
  for (std::size_t i = 0; i < level.gaps.size(); ++i) {
    if (level.gaps[i] == GapState::Open) seq.push_back(Token::mask());
    if (i < level.placed.size()) seq.push_back(question[level.placed[i]]);
  }
  return seq;
}

}  // namespace

std::vector<TrainingInstance> build_instances(const TokenSeq& context, const TokenSeq& answer,
                                              const TokenSeq& question, const std::vector<std::size_t>& order) {
  const auto n = question.size();
  if (!is_permutation_of_indices(order, n)) {
    throw Error(ErrorCode::RankingMismatch, "ranking is not a permutation of the " + std::to_string(n) + " question positions");
  }
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[order[r]] = r;

  const auto prefix = context_prefix(context, answer);
  std::vector<TrainingInstance> out;
  Level level;
  while (!level.done()) {
    TrainingInstance inst;
    inst.input = view_of(prefix, question, level);

    Level next;
    next.gaps.clear();
    for (std::size_t g = 0; g < level.gaps.size(); ++g) {
      if (level.gaps[g] == GapState::Sealed) {
        next.gaps.push_back(GapState::Sealed);
      } else {
        std::size_t lo = g == 0 ? 0 : level.placed[g - 1] + 1;
        std::size_t hi = g < level.placed.size() ? level.placed[g] : n;
        std::size_t best = n;
        for (std::size_t p = lo; p < hi; ++p) {
          if (best == n || rank[p] < rank[best]) best = p;
        }
        if (best == n) {
          inst.labels.push_back(Token::sep());
          next.gaps.push_back(GapState::Sealed);
        } else {
          inst.labels.push_back(question[best]);
          next.gaps.push_back(GapState::Open);
          next.placed.push_back(best);
          next.gaps.push_back(GapState::Open);
        }
      }
      if (g < level.placed.size()) next.placed.push_back(level.placed[g]);
    }
    out.push_back(std::move(inst));
    level = std::move(next);
  }
  return out;
}

std::vector<std::vector<TrainingInstance>> build_instances_batch_serial(const std::vector<BuildJob>& jobs) {
  std::vector<std::vector<TrainingInstance>> out(jobs.size());
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    out[i] = build_instances(jobs[i].context, jobs[i].answer, jobs[i].question, jobs[i].order);
  }
  return out;
}

std::vector<std::vector<TrainingInstance>> build_instances_batch(const std::vector<BuildJob>& jobs) {
  std::vector<std::vector<TrainingInstance>> out(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  const auto n = static_cast<std::ptrdiff_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = build_instances(jobs[i].context, jobs[i].answer, jobs[i].question, jobs[i].order);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::string to_json_line(const TrainingInstance& inst) {
  ordered_json j;
  j["input"] = texts(inst.input);
  j["labels"] = texts(inst.labels);
  return j.dump();
}

TrainingInstance instance_from_json_line(const std::string& line) {
  try {
    auto j = json::parse(line);
    return {from_texts(j.at("input").get<std::vector<std::string>>()),
            from_texts(j.at("labels").get<std::vector<std::string>>())};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedLine, std::string("bad instance line: ") + e.what());
  }
}

void write_instances(std::ostream& out, const std::vector<TrainingInstance>& instances) {
  for (const auto& inst : instances) out << to_json_line(inst) << '\n';
}

// ---------------------------------------------------------------------------
// Oracle filler

OracleFiller make_oracle_filler(const std::vector<TrainingInstance>& instances) {
  if (instances.empty()) throw Error(ErrorCode::ScheduleMismatch, "no instances to replay");
  OracleFiller oracle;
  const auto& first = instances.front().input;
  auto region = question_region_start(first);
  if (region == 0) throw Error(ErrorCode::ScheduleMismatch, "instance input lacks the C [S] A [S] prefix");
  oracle.prefix_.assign(first.begin(), first.begin() + static_cast<std::ptrdiff_t>(region));

  // Replay labels with token identities; positions are assigned at the end.
  struct Slot {
    Token token;
    std::size_t level;
  };
  std::vector<Slot> placed;
  std::vector<GapState> gaps{GapState::Open};
  for (std::size_t lvl = 0; lvl < instances.size(); ++lvl) {
    const auto& inst = instances[lvl];
    TokenSeq expect = oracle.prefix_;
    std::size_t open = 0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      if (gaps[i] == GapState::Open) {
        expect.push_back(Token::mask());
        ++open;
      }
      if (i < placed.size()) expect.push_back(placed[i].token);
    }
    if (open == 0 || expect != inst.input || inst.labels.size() != open) {
      throw Error(ErrorCode::ScheduleMismatch, "instance " + std::to_string(lvl) + " does not follow the schedule");
    }
    oracle.schedule_.emplace(ScriptedFiller::view_key(inst.input), inst.labels);

    std::vector<Slot> next_placed;
    std::vector<GapState> next_gaps;
    std::size_t k = 0;
    for (std::size_t i = 0; i < gaps.size(); ++i) {
      if (gaps[i] == GapState::Sealed) {
        next_gaps.push_back(GapState::Sealed);
      } else {
        const auto& label = inst.labels[k++];
        if (label.kind == TokenKind::Sep) {
          next_gaps.push_back(GapState::Sealed);
        } else if (label.is_word()) {
          next_gaps.push_back(GapState::Open);
          next_placed.push_back({label, lvl});
          next_gaps.push_back(GapState::Open);
        } else {
          throw Error(ErrorCode::ScheduleMismatch, "label must be a word or [S]");
        }
      }
      if (i < placed.size()) next_placed.push_back(placed[i]);
    }
    placed = std::move(next_placed);
    gaps = std::move(next_gaps);
  }
  if (!std::all_of(gaps.begin(), gaps.end(), [](GapState g) { return g == GapState::Sealed; })) {
    throw Error(ErrorCode::ScheduleMismatch, "instances end with open gaps");
  }
  for (auto& s : placed) {
    oracle.question_.push_back(s.token);
    oracle.level_.push_back(s.level);
  }
  return oracle;
}

FillResponse OracleFiller::fill(const FillRequest& request) const {
  request.validate();
  const auto& seq = request.sequence;
  if (seq.size() < prefix_.size() || !std::equal(prefix_.begin(), prefix_.end(), seq.begin())) {
    throw Error(ErrorCode::ScheduleMismatch, "view has a different context/answer prefix");
  }
  auto key = ScriptedFiller::view_key(seq);
  if (auto it = schedule_.find(key); it != schedule_.end()) return {it->second};

  // Blocks of adjacent words (sealed gaps between them) separated by masks.
  std::vector<TokenSeq> blocks;
  std::vector<std::size_t> mask_before_block;  // mask k precedes blocks[mask_before_block[k]]
  bool last_was_mask = false;
  bool started_block = false;
  for (std::size_t i = prefix_.size(); i < seq.size(); ++i) {
    const auto& t = seq[i];
    if (t.kind == TokenKind::Mask) {
      if (last_was_mask) throw Error(ErrorCode::ScheduleMismatch, "adjacent masks in view '" + key + "'");
      mask_before_block.push_back(blocks.size());
      started_block = false;
      last_was_mask = true;
    } else if (t.is_word()) {
      if (!started_block) {
        blocks.emplace_back();
        started_block = true;
      }
      blocks.back().push_back(t);
      last_was_mask = false;
    } else {
      throw Error(ErrorCode::ScheduleMismatch, "unexpected marker " + t.text + " in view");
    }
  }
  const bool leading_mask = seq.size() > prefix_.size() && seq[prefix_.size()].kind == TokenKind::Mask;
  const bool trailing_mask = seq.back().kind == TokenKind::Mask;

  const auto n = question_.size();
  auto matches_at = [&](const TokenSeq& block, std::size_t s) {
    if (s + block.size() > n) return false;
    return std::equal(block.begin(), block.end(), question_.begin() + static_cast<std::ptrdiff_t>(s));
  };

  std::vector<std::size_t> start(blocks.size());
  std::size_t cursor = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const auto& block = blocks[b];
    std::optional<std::size_t> found;
    if (b == 0 && !leading_mask) {
      if (matches_at(block, 0)) found = 0;
    } else if (b + 1 == blocks.size() && !trailing_mask) {
      if (block.size() <= n && n - block.size() >= cursor && matches_at(block, n - block.size())) {
        found = n - block.size();
      }
    } else {
      for (std::size_t s = cursor; s + block.size() <= n; ++s) {
        if (matches_at(block, s)) {
          found = s;
          break;
        }
      }
    }
    if (!found) throw Error(ErrorCode::ScheduleMismatch, "view '" + key + "' is not a subsequence of the gold question");
    start[b] = *found;
    cursor = *found + block.size();
  }

  FillResponse out;
  for (auto b : mask_before_block) {
    std::size_t lo = b == 0 ? 0 : start[b - 1] + blocks[b - 1].size();
    std::size_t hi = b < blocks.size() ? start[b] : n;
    std::size_t best = n;
    for (std::size_t p = lo; p < hi; ++p) {
      if (best == n || level_[p] < level_[best]) best = p;
    }
    out.predictions.push_back(best == n ? Token::sep() : question_[best]);
  }
  return out;
}

}  // namespace kpqg
