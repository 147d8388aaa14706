#include "kpqg/backends.hpp"

#include "kpqg/dataio.hpp"
#include "kpqg/error.hpp"
#include "kpqg/metrics.hpp"

namespace kpqg {

namespace {

constexpr const char* kBuiltinQuestions[] = {
    "What is the main idea of the passage?",
    "Who wrote the letter to the editor?",
    "Why did the boy go to the market?",
    "Where does the story most probably take place?",
    "What can we learn from the passage?",
    "How did the girl feel after the exam?",
    "Which of the following is true according to the passage?",
    "What did the writer do on the weekend?",
    "When did the family move to the city?",
    "Who helped the old man cross the street?",
    "What is the best title for the passage?",
    "Why was the teacher angry with the students?",
};

}  // namespace

std::vector<TokenSeq> builtin_toy_corpus() {
  std::vector<TokenSeq> out;
  for (const auto* q : kBuiltinQuestions) out.push_back(tokenize(q));
  return out;
}

std::string backend_name(std::string_view selector) {
  auto colon = selector.find(':');
  return std::string(selector.substr(0, colon));
}

std::shared_ptr<const MaskFiller> make_filler(std::string_view selector, const FillerOptions& options) {
  if (selector == "toy") {
    std::vector<TokenSeq> corpus;
    if (options.toy_corpus) {
      const auto& path = *options.toy_corpus;
      if (path.extension() == ".jsonl") {
        for (const auto& r : load_dataset(path, Split::Train).records) corpus.push_back(tokenize(r.question));
      } else {
        for (const auto& line : metrics::read_lines(path)) corpus.push_back(tokenize(line));
      }
    } else {
      corpus = builtin_toy_corpus();
    }
    return std::make_shared<ToyFiller>(fit_toy(corpus, options.sep_threshold));
  }
  if (selector.starts_with("scripted:")) {
    return std::make_shared<ScriptedFiller>(ScriptedFiller::load(std::string(selector.substr(9))));
  }
  if (selector == "remote") return std::make_shared<RemoteFiller>(RemoteFiller::from_env());
  throw Error(ErrorCode::InvalidArgument, "unknown filler '" + std::string(selector) +
                                              "' (expected toy, scripted:<path> or remote)");
}

std::shared_ptr<const AnswerScorer> make_scorer(std::string_view selector) {
  if (selector == "overlap") return std::make_shared<OverlapScorer>();
  if (selector.starts_with("scripted:")) {
    return std::make_shared<ScriptedScorer>(ScriptedScorer::load(std::string(selector.substr(9))));
  }
  if (selector == "remote") return std::make_shared<RemoteScorer>(RemoteScorer::from_env());
  throw Error(ErrorCode::InvalidArgument, "unknown scorer '" + std::string(selector) +
                                              "' (expected overlap, scripted:<path> or remote)");
}

}  // namespace kpqg
