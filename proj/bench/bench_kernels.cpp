#include <benchmark/benchmark.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include "kpqg/importance.hpp"
#include "kpqg/instances.hpp"
#include "kpqg/metrics.hpp"

using namespace kpqg;

namespace {

const std::vector<std::string> kVocab{"who", "what", "when", "the", "a", "did", "is", "mars", "planet",
                                      "nasa", "project", "?", "of", "to", "boy", "park", "see", "go"};

TokenSeq random_sentence(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  TokenSeq s;
  auto n = lo + rng() % (hi - lo + 1);
  for (std::size_t i = 0; i < n; ++i) s.push_back(Token::word(kVocab[rng() % kVocab.size()]));
  return s;
}

struct Corpus {
  std::vector<TokenSeq> candidates;
  std::vector<TokenSeq> references;
};

Corpus make_corpus(std::size_t n) {
  std::mt19937_64 rng(11);
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    c.references.push_back(random_sentence(rng, 6, 24));
    c.candidates.push_back(random_sentence(rng, 6, 24));
  }
  return c;
}

void BM_CorpusStatsSerial(benchmark::State& state) {
  auto c = make_corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(metrics::corpus_stats_serial(c.candidates, c.references));
}

void BM_CorpusStatsParallel(benchmark::State& state) {
  auto c = make_corpus(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(metrics::corpus_stats(c.candidates, c.references));
}

// Overlap scoring is cheap, so this mostly measures fan-out overhead on long
// questions; a remote scorer is where the parallel path pays off.
void BM_RankSerial(benchmark::State& state) {
  std::mt19937_64 rng(5);
  auto context = random_sentence(rng, 200, 200);
  auto question = random_sentence(rng, state.range(0), state.range(0));
  OverlapScorer scorer;
  for (auto _ : state) benchmark::DoNotOptimize(rank_importance_serial(context, {}, question, scorer));
}

void BM_RankParallel(benchmark::State& state) {
  std::mt19937_64 rng(5);
  auto context = random_sentence(rng, 200, 200);
  auto question = random_sentence(rng, state.range(0), state.range(0));
  OverlapScorer scorer;
  for (auto _ : state) benchmark::DoNotOptimize(rank_importance(context, {}, question, scorer));
}

std::vector<BuildJob> make_jobs(std::size_t n) {
  std::mt19937_64 rng(3);
  std::vector<BuildJob> jobs;
  for (std::size_t i = 0; i < n; ++i) {
    BuildJob job{random_sentence(rng, 40, 80), random_sentence(rng, 1, 4), random_sentence(rng, 6, 24), {}};
    job.order.resize(job.question.size());
    std::iota(job.order.begin(), job.order.end(), std::size_t{0});
    std::shuffle(job.order.begin(), job.order.end(), rng);
    jobs.push_back(std::move(job));
  }
  return jobs;
}

void BM_BuildSerial(benchmark::State& state) {
  auto jobs = make_jobs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_instances_batch_serial(jobs));
}

void BM_BuildParallel(benchmark::State& state) {
  auto jobs = make_jobs(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_instances_batch(jobs));
}

}  // namespace

BENCHMARK(BM_CorpusStatsSerial)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CorpusStatsParallel)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RankSerial)->Arg(24)->Arg(256)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_RankParallel)->Arg(24)->Arg(256)->Unit(benchmark::kMicrosecond)->UseRealTime();
BENCHMARK(BM_BuildSerial)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildParallel)->Arg(1000)->Arg(5000)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
