// Serial vs OpenMP-parallel kernels: the store distance scan behind
// neighborhood retrieval and the per-candidate decision-matrix build.

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "capsel/semantic_matching.hpp"
#include "capsel/visual_retrieval.hpp"

namespace {

using namespace capsel;

std::vector<ImageRecord> make_store(std::size_t count, std::size_t dimension,
                                    std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::vector<ImageRecord> store;
  store.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    DenseVector feature(dimension);
    for (double& x : feature) {
      x = coord(rng);
    }
    store.push_back({"img" + std::to_string(i), std::move(feature), {}});
  }
  return store;
}

void bm_retrieve_serial(benchmark::State& state) {
  const auto store = make_store(static_cast<std::size_t>(state.range(0)), 512, 7);
  const DenseVector query(512, 0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(retrieve_neighbors_serial(query, store, 0.5, 100));
  }
}

void bm_retrieve_parallel(benchmark::State& state) {
  const auto store = make_store(static_cast<std::size_t>(state.range(0)), 512, 7);
  const DenseVector query(512, 0.25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(retrieve_neighbors(query, store, 0.5, 100));
  }
}

struct MatrixInputs {
  EmbeddingTable table{8};
  PosLexicon pos_lexicon;
  SlotSet query_slots;
  CandidateSet candidates;
};

MatrixInputs make_matrix_inputs(std::size_t candidate_count) {
  MatrixInputs inputs;
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  std::vector<std::string> vocabulary;
  for (int i = 0; i < 40; ++i) {
    vocabulary.push_back("w" + std::to_string(i));
    DenseVector v(8);
    for (double& x : v) {
      x = value(rng);
    }
    inputs.table.insert(vocabulary.back(), std::move(v));
    const LexPos pos = i % 3 == 0 ? LexPos::kNoun : (i % 3 == 1 ? LexPos::kVerb
                                                                : LexPos::kAdjective);
    inputs.pos_lexicon.insert(vocabulary.back(), pos);
  }
  inputs.query_slots.objects = {"w0", "w3", "w6"};
  inputs.query_slots.actions = {"w1", "w4"};
  inputs.query_slots.attribute_pairs = {{"w2", "w0"}, {"w5", "w3"}};

  std::uniform_int_distribution<std::size_t> pick(0, vocabulary.size() - 1);
  for (std::size_t i = 0; i < candidate_count; ++i) {
    Candidate candidate;
    for (int t = 0; t < 10; ++t) {
      candidate.tokens.push_back(vocabulary[pick(rng)]);
    }
    candidate.caption = "candidate " + std::to_string(i);
    inputs.candidates.entries.push_back(std::move(candidate));
  }
  return inputs;
}

void bm_decision_matrix_serial(benchmark::State& state) {
  const auto inputs = make_matrix_inputs(static_cast<std::size_t>(state.range(0)));
  const MatchParams params{0.85};
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_decision_matrix_serial(
        inputs.query_slots, inputs.candidates, inputs.table, inputs.pos_lexicon, params));
  }
}

void bm_decision_matrix_parallel(benchmark::State& state) {
  const auto inputs = make_matrix_inputs(static_cast<std::size_t>(state.range(0)));
  const MatchParams params{0.85};
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_decision_matrix(
        inputs.query_slots, inputs.candidates, inputs.table, inputs.pos_lexicon, params));
  }
}

}  // namespace

BENCHMARK(bm_retrieve_serial)->Arg(1000)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_retrieve_parallel)->Arg(1000)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_decision_matrix_serial)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_decision_matrix_parallel)->Arg(50)->Arg(500)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
