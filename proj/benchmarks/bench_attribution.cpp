#include <benchmark/benchmark.h>

#include <random>

#include "deeplift/autodiff.hpp"
#include "deeplift/baselines.hpp"
#include "deeplift/deeplift.hpp"
#include "deeplift/genomics.hpp"
#include "deeplift/normalize.hpp"

namespace {

using namespace deeplift;

struct Fixture {
  Graph model = normalize_constrained_weights(genomics::build_genomics_cnn({}));
  InputMap input;
  InputMap reference = zero_reference(model);

  Fixture() {
    std::mt19937_64 rng(1);
    const auto examples = genomics::generate_split({}, 1, rng(), "bench");
    input = single_input(model, genomics::one_hot_encode(examples.front().sequence));
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_Forward(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(forward(f.model, f.input));
}
BENCHMARK(BM_Forward);

void BM_Backward(benchmark::State& state) {
  const auto& f = fixture();
  const auto trace = forward(f.model, f.input);
  for (auto _ : state) benchmark::DoNotOptimize(backward(f.model, trace, {"logit", 0}));
}
BENCHMARK(BM_Backward);

void BM_DeepLift(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(deeplift_attribution(f.model, f.input, f.reference, {"logit", 0}));
}
BENCHMARK(BM_DeepLift);

void BM_GradientTimesInput(benchmark::State& state) {
  const auto& f = fixture();
  for (auto _ : state) benchmark::DoNotOptimize(gradient_times_input(f.model, f.input, {"logit", 0}));
}
BENCHMARK(BM_GradientTimesInput);

void BM_MultipliersReusedReference(benchmark::State& state) {
  const auto& f = fixture();
  const auto reference = compute_reference(f.model, f.reference);
  const auto trace = forward(f.model, f.input);
  for (auto _ : state) benchmark::DoNotOptimize(propagate_multipliers(f.model, trace, reference, {"logit", 0}));
}
BENCHMARK(BM_MultipliersReusedReference);

}  // namespace
BENCHMARK_MAIN();
