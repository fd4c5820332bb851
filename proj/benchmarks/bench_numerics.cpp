#include <benchmark/benchmark.h>

#include <random>

#include "geoquery/decoder/geo_decoder.hpp"
#include "geoquery/geocell/partition.hpp"
#include "geoquery/numerics/ops.hpp"

namespace {

namespace nx = geoquery::numerics;
namespace dc = geoquery::decoder;

nx::Tensor random_tensor(nx::Shape shape, std::mt19937_64& rng, bool grad = false) {
  std::normal_distribution<double> n;
  std::size_t count = 1;
  for (auto d : shape) count *= d;
  std::vector<nx::Scalar> v(count);
  for (auto& x : v) x = static_cast<nx::Scalar>(n(rng));
  return nx::Tensor::from(std::move(shape), std::move(v), grad);
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  const auto a = random_tensor({n, n}, rng);
  const auto b = random_tensor({n, n}, rng);
  nx::NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(nx::matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(32)->Arg(64)->Arg(128);

dc::ModelConfig bench_config(std::size_t hierarchies, std::size_t scenes) {
  dc::ModelConfig c;
  c.hierarchies = hierarchies;
  c.scenes = scenes;
  c.dim = 32;
  c.heads = 4;
  c.independent_layers = 2;
  c.dependent_layers = 1;
  c.ffn_multiplier = 2;
  c.classes_per_hierarchy.assign(hierarchies, 100);
  c.encoder.kind = dc::EncoderKind::kPrecomputed;
  c.encoder.token_dim = 32;
  c.seed = 3;
  return c;
}

void BM_DecoderForward(benchmark::State& state) {
  const dc::GeoDecoderModel model(bench_config(static_cast<std::size_t>(state.range(0)), 4));
  std::mt19937_64 rng(2);
  const auto tokens = random_tensor({49, 32}, rng);
  nx::NoGradGuard guard;
  for (auto _ : state) benchmark::DoNotOptimize(model.forward(tokens));
}
BENCHMARK(BM_DecoderForward)->Arg(1)->Arg(3)->Arg(7);

void BM_DecoderForwardBackward(benchmark::State& state) {
  dc::GeoDecoderModel model(bench_config(static_cast<std::size_t>(state.range(0)), 4));
  std::mt19937_64 rng(2);
  const auto tokens = random_tensor({49, 32}, rng);
  const geoquery::geocell::LabelChain labels(static_cast<std::size_t>(state.range(0)), std::size_t{1});
  for (auto _ : state) {
    model.store().zero_grad();
    const auto loss = dc::loss(model.forward(tokens), labels, 2);
    nx::backward(loss);
    benchmark::DoNotOptimize(loss.item());
  }
}
BENCHMARK(BM_DecoderForwardBackward)->Arg(1)->Arg(3)->Arg(7);

}  // namespace
