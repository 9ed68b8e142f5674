// Copyright 2026 The HiSS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "hiss/kernels.h"
#include "hiss/models.h"
#include "hiss/samplers.h"

namespace {

void BM_HissSweepBernoulli(benchmark::State& state) {
  const hiss::TabularModel model = hiss::Bernoulli4d();
  hiss::SamplerConfig config;
  config.refinements = static_cast<int>(state.range(0));
  const hiss::CouplingKernel kernel = config.MakeKernel();
  hiss::Rng rng(1);
  hiss::ChainStats stats;
  hiss::DiscreteState theta = model.domain().LowestState();
  for (auto _ : state) {
    theta = hiss::HissGibbsStep(theta, model, config, kernel, rng, stats);
    benchmark::DoNotOptimize(theta);
  }
}
BENCHMARK(BM_HissSweepBernoulli)->Arg(0)->Arg(2);

void BM_HissSweepIsing(benchmark::State& state) {
  const hiss::IsingModel model = hiss::Ising(static_cast<std::size_t>(state.range(0)));
  hiss::SamplerConfig config;
  const hiss::CouplingKernel kernel = config.MakeKernel();
  hiss::Rng rng(1);
  hiss::ChainStats stats;
  hiss::DiscreteState theta = model.domain().LowestState();
  for (auto _ : state) {
    theta = hiss::HissGibbsStep(theta, model, config, kernel, rng, stats);
    benchmark::DoNotOptimize(theta);
  }
}
BENCHMARK(BM_HissSweepIsing)->Arg(3)->Arg(8)->Arg(16);

void BM_DmalaIsing(benchmark::State& state) {
  const hiss::IsingModel model = hiss::Ising(static_cast<std::size_t>(state.range(0)));
  hiss::Rng rng(1);
  hiss::ChainStats stats;
  hiss::DiscreteState theta = model.domain().LowestState();
  for (auto _ : state) {
    theta = hiss::DmalaStep(theta, model, 0.2, rng, stats).state;
    benchmark::DoNotOptimize(theta);
  }
}
BENCHMARK(BM_DmalaIsing)->Arg(3)->Arg(8)->Arg(16);

void BM_GwgIsing(benchmark::State& state) {
  const hiss::IsingModel model = hiss::Ising(static_cast<std::size_t>(state.range(0)));
  hiss::Rng rng(1);
  hiss::ChainStats stats;
  hiss::DiscreteState theta = model.domain().LowestState();
  for (auto _ : state) {
    theta = hiss::GwgStep(theta, model, rng, stats).state;
    benchmark::DoNotOptimize(theta);
  }
}
BENCHMARK(BM_GwgIsing)->Arg(3)->Arg(8);

void BM_LogisticDenoise(benchmark::State& state) {
  const hiss::DomainSpec spec =
      hiss::DomainSpec::Uniform(static_cast<std::size_t>(state.range(0)), {-1.0, 1.0});
  const hiss::CouplingKernel kernel = hiss::LogisticKernel(4.0);
  hiss::Rng rng(3);
  const hiss::AuxState aux = hiss::HissNoise(spec.LowestState(), kernel, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(hiss::HissDenoise(aux, kernel, spec, rng));
  }
}
BENCHMARK(BM_LogisticDenoise)->Arg(9)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
