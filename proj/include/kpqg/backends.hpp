#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kpqg/importance.hpp"
#include "kpqg/maskfill.hpp"

namespace kpqg {

struct FillerOptions {
  // Toy corpus: a dataset .jsonl (question field) or plain text, one
  // sentence per line. Empty means the built-in question corpus.
  std::optional<std::filesystem::path> toy_corpus;
  std::size_t sep_threshold = 1;
};

/// Short question corpus used when no toy corpus is given.
std::vector<TokenSeq> builtin_toy_corpus();

/// selector: "toy" | "scripted:<path>" | "remote" (KPQG_REMOTE_URL)
std::shared_ptr<const MaskFiller> make_filler(std::string_view selector, const FillerOptions& options = {});

/// selector: "overlap" | "scripted:<path>" | "remote" (KPQG_SCORER_URL)
std::shared_ptr<const AnswerScorer> make_scorer(std::string_view selector);

/// Name a selector registers under ("scripted:x.json" -> "scripted").
std::string backend_name(std::string_view selector);

}  // namespace kpqg
