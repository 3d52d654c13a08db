// Copyright 2026 The qldlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "qld/biclique.hpp"
#include "qld/ensembles.hpp"
#include "qld/haar.hpp"
#include "qld/lowdeg.hpp"
#include "qld/mitigation.hpp"

using namespace qld;

static void BM_MomentOperator(benchmark::State &state) {
    const int k = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(haar::moment_operator(3, k).matrix.data());
}
BENCHMARK(BM_MomentOperator)->DenseRange(1, 4);

static void BM_CenteredMomentGamma(benchmark::State &state) {
    const int t = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(haar::centered_moment_operator(2, t).matrix.data());
}
BENCHMARK(BM_CenteredMomentGamma)->DenseRange(2, 5);

static void BM_HaarUnitary(benchmark::State &state) {
    Rng rng(1);
    const auto dim = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(haar::haar_unitary(dim, rng).data());
}
BENCHMARK(BM_HaarUnitary)->RangeMultiplier(2)->Range(2, 64);

static void BM_StabilizerDesignCertify(benchmark::State &state) {
    auto st = ens::make_stabilizer_ensemble(2);
    Rng rng(2);
    for (auto _ : state)
        benchmark::DoNotOptimize(ens::design_certify(st, 3, ens::DesignMode::exact, 0, rng, 1).epsilon);
}
BENCHMARK(BM_StabilizerDesignCertify)->Unit(benchmark::kMillisecond);

static void BM_DegreeAdvantage(benchmark::State &state) {
    const auto method = state.range(0) == 0 ? lowdeg::Method::moment : lowdeg::Method::enumeration;
    auto reg = QuditRegister::uniform(2, 2);
    auto e = ens::make_haar_ensemble(reg);
    Rng rng(3);
    auto plan = lowdeg::random_local_plan(reg, 3, rng);
    lowdeg::Options opt;
    opt.method = method;
    for (auto _ : state) benchmark::DoNotOptimize(lowdeg::degree_advantage(e, plan, 3, opt).total);
    state.SetLabel(lowdeg::method_name(method));
}
BENCHMARK(BM_DegreeAdvantage)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_EdgeCountTrial(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    biclique::BicliqueInstance inst{n, 2, n / 2.0, n};
    auto plan = biclique::LocalPlanGrid::computational(n, n, 2);
    Rng rng(4);
    for (auto _ : state) {
        auto secret = biclique::sample_secret(inst, rng);
        auto grid = biclique::measure_grid(inst, &secret, plan, rng);
        benchmark::DoNotOptimize(biclique::edge_count_protocol(inst, grid).statistic);
    }
}
BENCHMARK(BM_EdgeCountTrial)->RangeMultiplier(2)->Range(16, 128);

static void BM_FourierMass(benchmark::State &state) {
    biclique::BicliqueInstance inst{3, 2, 1.5, 3};
    auto plan = biclique::LocalPlanGrid::computational(3, 3, 2);
    for (auto _ : state) benchmark::DoNotOptimize(biclique::fourier_mass(inst, plan, {{0, 0}, {0, 1}, {1, 0}, {1, 1}}));
}
BENCHMARK(BM_FourierMass);

static void BM_NoisyCircuit(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    Rng rng(5);
    auto spec = mitigation::haar_circuit(n, 2, 0.2, rng);
    auto in = DensityOperator::from_pure(PureState::basis(QuditRegister::uniform(n, 2), 0));
    for (auto _ : state) benchmark::DoNotOptimize(mitigation::apply_noisy_circuit(spec, in).purity());
}
BENCHMARK(BM_NoisyCircuit)->DenseRange(2, 6, 2)->Unit(benchmark::kMicrosecond);
BENCHMARK_MAIN();
