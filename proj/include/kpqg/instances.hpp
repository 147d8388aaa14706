#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "kpqg/importance.hpp"
#include "kpqg/maskfill.hpp"
#include "kpqg/text.hpp"

namespace kpqg {

struct TrainingInstance {
  TokenSeq input;   // C [S] A [S] then placed tokens with [M] at each Open gap
  TokenSeq labels;  // one Word or [S] per mask, left to right

  friend bool operator==(const TrainingInstance&, const TrainingInstance&) = default;
};

/// Importance-first insertion schedule. Level 0 has a single Open gap; at each
/// level every Open gap is labeled with its highest-ranked unplaced token, or
/// [S] (sealing it) when the gap spans nothing. One instance per level until
/// all gaps are Sealed. Throws RankingMismatch unless order is a permutation
/// of the question positions.
std::vector<TrainingInstance> build_instances(const TokenSeq& context, const TokenSeq& answer,
                                              const TokenSeq& question, const std::vector<std::size_t>& order);

inline std::vector<TrainingInstance> build_instances(const TokenSeq& context, const TokenSeq& answer,
                                                     const TokenSeq& question, const ImportanceRanking& ranking) {
  return build_instances(context, answer, question, ranking.order);
}

struct BuildJob {
  TokenSeq context;
  TokenSeq answer;
  TokenSeq question;
  std::vector<std::size_t> order;
};

/// Builds every job's instances in parallel; output index matches job index.
std::vector<std::vector<TrainingInstance>> build_instances_batch(const std::vector<BuildJob>& jobs);
std::vector<std::vector<TrainingInstance>> build_instances_batch_serial(const std::vector<BuildJob>& jobs);

// JSONL: one {"input": [...], "labels": [...]} object per line.
std::string to_json_line(const TrainingInstance& inst);
TrainingInstance instance_from_json_line(const std::string& line);
void write_instances(std::ostream& out, const std::vector<TrainingInstance>& instances);

// Replays a gold question's construction schedule as a mask filler. Views
// from the schedule get the recorded labels; any other view (e.g. decoding
// started from keywords) is aligned to the gold question and each open gap
// receives its earliest-scheduled unplaced token, or [S] if it spans none.
class OracleFiller final : public MaskFiller {
 public:
  FillResponse fill(const FillRequest& request) const override;
  std::string name() const override { return "oracle"; }

  const TokenSeq& question() const { return question_; }

 private:
  friend OracleFiller make_oracle_filler(const std::vector<TrainingInstance>& instances);

  TokenSeq prefix_;
  TokenSeq question_;
  std::vector<std::size_t> level_;  // schedule level at which each position was placed
  std::map<std::string, TokenSeq> schedule_;
};

/// Throws ScheduleMismatch when the instances do not replay to a full question.
OracleFiller make_oracle_filler(const std::vector<TrainingInstance>& instances);

}  // namespace kpqg
