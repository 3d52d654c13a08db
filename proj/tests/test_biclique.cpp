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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "qld/biclique.hpp"
#include "qld/haar.hpp"

using namespace qld;
using namespace qld::biclique;

namespace {

Vector ket(int d, int x) {
    Vector v = Vector::Zero(d);
    v(x) = 1.0;
    return v;
}

struct Moments {
    double mean = 0.0, var = 0.0, sd_mean = 0.0;
};

Moments moments(const std::vector<double> &xs) {
    Moments m;
    for (double x : xs) m.mean += x;
    m.mean /= xs.size();
    for (double x : xs) m.var += (x - m.mean) * (x - m.mean);
    m.var /= (xs.size() - 1);
    m.sd_mean = std::sqrt(m.var / xs.size());
    return m;
}

}  // namespace

TEST(Instance, Validation) {
    EXPECT_THROW((BicliqueInstance{4, 1, 1.0, 4}).validate(), std::invalid_argument);
    EXPECT_THROW((BicliqueInstance{4, 2, 5.0, 4}).validate(), std::invalid_argument);
    EXPECT_NEAR((BicliqueInstance{8, 2, 2.0, 8}).kappa(), 0.25, 0.0);
}

TEST(SampleCopy, ZeroKappaIsMaximallyMixed) {
    Rng rng(1);
    BicliqueInstance inst{3, 2, 0.0, 3};
    auto s = sample_secret(inst, rng);
    EXPECT_TRUE(s.S.empty());
    EXPECT_LT(max_abs(sample_copy(inst, s).rho - Matrix::Identity(8, 8) / 8.0), 1e-15);
}

TEST(SampleCopy, FullKappaIsPlantedProduct) {
    BicliqueInstance inst{2, 2, 2.0, 2};
    PlantedSecret s{ket(2, 1), {0, 1}};
    Matrix expect = Matrix::Zero(4, 4);
    expect(3, 3) = 1.0;
    EXPECT_LT(max_abs(sample_copy(inst, s).rho - expect), 1e-15);
}

TEST(SampleCopy, MixtureFormula) {
    Rng rng(2);
    BicliqueInstance inst{3, 2, 1.2, 3};
    const double k = inst.kappa();
    PlantedSecret s{haar::haar_vector(2, rng), {1}};
    const Matrix r = s.rho * s.rho.adjoint();
    const Matrix h = Matrix::Identity(2, 2) / 2.0;
    Matrix expect = k * kron(kron(h, r), h) + (1 - k) * Matrix::Identity(8, 8) / 8.0;
    auto out = sample_copy(inst, s);
    EXPECT_LT(max_abs(out.rho - expect), 1e-15);
    EXPECT_NO_THROW(out.validate());
}

TEST(ExpectedPower, SubsetAverageOracle) {
    Rng rng(3);
    BicliqueInstance inst{2, 2, 0.7, 2};
    const double k = inst.kappa();
    Vector rho = haar::haar_vector(2, rng);
    Matrix direct = Matrix::Zero(4, 4);
    for (unsigned mask = 0; mask < 4; ++mask) {
        std::vector<int> S;
        for (int i = 0; i < 2; ++i)
            if (mask >> i & 1) S.push_back(i);
        const double w = std::pow(k, S.size()) * std::pow(1 - k, 2 - S.size());
        direct += w * sample_copy(inst, PlantedSecret{rho, S}).rho;
    }
    EXPECT_LT(max_abs(expected_power(inst, rho, 1) - direct), 1e-12);
}

TEST(ExpectedPower, ExpansionMatchesDirect) {
    Rng rng(4);
    for (int n = 1; n <= 3; ++n)
        for (int d : {2, 3}) {
            if (n == 3 && d == 3) continue;
            for (int t = 1; t <= 2; ++t) {
                BicliqueInstance inst{n, d, 0.4 * n, 2};
                Vector rho = haar::haar_vector(d, rng);
                EXPECT_LT(max_abs(expected_power(inst, rho, t) - expected_power_direct(inst, rho, t)), 1e-12)
                    << n << " " << d << " " << t;
            }
        }
}

TEST(MeasureGrid, NullMarginalsUniform) {
    Rng rng(5);
    BicliqueInstance inst{4, 3, 2.0, 2};
    auto plan = LocalPlanGrid::computational(2, 4, 3);
    const int N = 10000;
    std::vector<std::vector<int>> count(8, std::vector<int>(3, 0));
    for (int s = 0; s < N; ++s) {
        auto g = measure_grid(inst, nullptr, plan, rng);
        EXPECT_TRUE(g.consistent(QuditRegister::uniform(4, 3)));
        for (int c = 0; c < 2; ++c)
            for (int i = 0; i < 4; ++i) ++count[c * 4 + i][g.grid[c][i]];
    }
    const double sd = std::sqrt(N * (1.0 / 3) * (2.0 / 3));
    for (const auto &cell : count)
        for (int v : cell) EXPECT_LT(std::abs(v - N / 3.0), 3.5 * sd);
}

TEST(MeasureGrid, FullPlantAllZeros) {
    Rng rng(6);
    BicliqueInstance inst{5, 2, 5.0, 3};
    PlantedSecret s{ket(2, 0), {0, 1, 2, 3, 4}};
    auto g = measure_grid(inst, &s, LocalPlanGrid::computational(3, 5, 2), rng);
    for (const auto &row : g.grid)
        for (int v : row) EXPECT_EQ(v, 0);
}

TEST(MeasureGrid, ElevatedEdgeProbability) {
    Rng rng(7);
    const double p = 0.15;
    Vector rho(2);
    rho << std::sqrt(0.5 + p), std::sqrt(0.5 - p);
    BicliqueInstance inst{8, 2, 8.0, 8};
    PlantedSecret s{rho, {0, 1, 2, 3, 4, 5, 6, 7}};
    auto plan = LocalPlanGrid::computational(8, 8, 2);
    long ones = 0, total = 0;
    for (int rep = 0; rep < 500; ++rep) {
        auto g = measure_grid(inst, &s, plan, rng);
        for (const auto &row : g.grid)
            for (int v : row) {
                ones += v == 0;
                ++total;
            }
    }
    const double f = static_cast<double>(ones) / total;
    EXPECT_LT(std::abs(f - (0.5 + p)), 3 * std::sqrt(0.25 / total));
}

TEST(MeasureGrid, MatchesClassicalGenerator) {
    Rng rng(8);
    BicliqueInstance inst{4, 2, 2.0, 4};
    PlantedSecret s{ket(2, 1), {0, 2}};
    auto plan = LocalPlanGrid::computational(4, 4, 2);
    const int N = 10000;
    const int cells = 16;
    std::vector<double> mq(cells, 0), mc(cells, 0), pq(cells * cells, 0), pc(cells * cells, 0);
    auto accumulate = [&](const OutcomeRecord &g, std::vector<double> &m, std::vector<double> &pr) {
        std::vector<int> flat;
        for (const auto &row : g.grid)
            for (int v : row) flat.push_back(v);
        for (int a = 0; a < cells; ++a) {
            m[a] += flat[a];
            for (int b = a + 1; b < cells; ++b) pr[a * cells + b] += flat[a] * flat[b];
        }
    };
    for (int i = 0; i < N; ++i) {
        accumulate(measure_grid(inst, &s, plan, rng), mq, pq);
        accumulate(classical_planted_biclique(4, 4, inst.kappa(), s.S, rng), mc, pc);
    }
    double tv = 0.0, worst = 0.0;
    int terms = 0;
    for (int a = 0; a < cells; ++a) {
        const double dm = std::abs(mq[a] - mc[a]) / N;
        tv += dm;
        worst = std::max(worst, dm);
        ++terms;
        for (int b = a + 1; b < cells; ++b) {
            const double dp = std::abs(pq[a * cells + b] - pc[a * cells + b]) / N;
            tv += dp;
            worst = std::max(worst, dp);
            ++terms;
        }
    }
    EXPECT_LT(tv / terms, 0.02);
    EXPECT_LT(worst, 0.04);
}

TEST(Swap, ClosedForms) {
    EXPECT_DOUBLE_EQ(swap_null_mean(2), 0.75);
    for (int d : {2, 3, 5}) EXPECT_DOUBLE_EQ(swap_alt_mean(d, 1.0), 1.0);
    EXPECT_NEAR(swap_null_variance(10, 20, 2), 3.0 / 1600.0, 1e-18);
    EXPECT_THROW(swap_null_variance(5, 2, 2), std::invalid_argument);
    EXPECT_DOUBLE_EQ(swap_statistic({1, 0, 1, 1}), 0.75);
}

TEST(Swap, NullMeanAndVariance) {
    for (int d : {2, 3}) {
        BicliqueInstance inst{10, d, 3.0, 20};
        Rng rng(9 + d);
        std::vector<double> z;
        for (int i = 0; i < 10000; ++i) z.push_back(swap_protocol(inst, nullptr, rng).statistic);
        auto mo = moments(z);
        EXPECT_LT(std::abs(mo.mean - swap_null_mean(d)), 3 * mo.sd_mean);
        const double v = swap_null_variance(10, 20, d);
        EXPECT_LT(std::abs(mo.var - v), 0.1 * v);
    }
}

TEST(Swap, PlantedMeanAndSecondMoment) {
    for (int d : {2, 3}) {
        BicliqueInstance inst{8, d, 4.0, 8};
        Rng rng(20 + d);
        std::vector<double> z, z2;
        for (int i = 0; i < 10000; ++i) {
            Rng r = rng.derive(i);
            auto s = sample_secret(inst, r);
            const double v = swap_protocol(inst, &s, r).statistic;
            z.push_back(v);
            z2.push_back(v * v);
        }
        auto m1 = moments(z), m2 = moments(z2);
        EXPECT_LT(std::abs(m1.mean - swap_alt_mean(d, inst.kappa())), 3 * m1.sd_mean);
        EXPECT_LT(std::abs(m2.mean - swap_second_moment(inst)), 3 * m2.sd_mean);
    }
}

TEST(EdgeCount, NullOnesAreBinomial) {
    Rng rng(30);
    BicliqueInstance inst{16, 2, 4.0, 16};
    auto plan = LocalPlanGrid::computational(16, 16, 2);
    std::vector<double> ones;
    for (int i = 0; i < 2000; ++i) {
        auto g = measure_grid(inst, nullptr, plan, rng);
        double c = 0;
        for (const auto &row : g.grid)
            for (int v : row) c += v == 0;
        ones.push_back(c);
    }
    auto mo = moments(ones);
    EXPECT_LT(std::abs(mo.mean - 128.0), 3 * mo.sd_mean);
    auto r = edge_count_protocol(inst, measure_grid(inst, nullptr, plan, rng));
    EXPECT_NEAR(r.null_mean, 128.0, 1e-12);
    EXPECT_NEAR(r.threshold, kEdgeCountZ * 8.0, 1e-12);
    EXPECT_EQ(r.decision, r.statistic > r.threshold);
}

TEST(Detectors, NamesRoundTrip) {
    for (auto d : {Detector::edge_count, Detector::subgraph_scan, Detector::swap})
        EXPECT_EQ(detector_from_string(detector_name(d)), d);
    EXPECT_THROW(detector_from_string("clique"), std::invalid_argument);
}

TEST(Detectors, ScanCapsEnforced) {
    BicliqueInstance inst{64, 2, 8.0, 64};
    Rng rng(31);
    auto g = measure_grid(inst, nullptr, LocalPlanGrid::computational(64, 64, 2), rng);
    EXPECT_THROW(subgraph_scan(inst, g, ScanCaps{13, 2, 0.0}), ResourceError);
    EXPECT_THROW(subgraph_scan(inst, g, ScanCaps{6, 6, 0.0}), ResourceError);
}

TEST(Detectors, NullCalibration) {
    for (auto det : {Detector::edge_count, Detector::subgraph_scan, Detector::swap}) {
        auto inst = default_instance(det);
        const double fpr = false_positive_rate(det, inst, 1000, Rng(40), 1);
        EXPECT_GE(fpr, 0.01) << detector_name(det);
        EXPECT_LE(fpr, 0.2) << detector_name(det);
    }
}

TEST(FourierMass, SinglePositionVanishes) {
    BicliqueInstance inst{3, 2, 1.5, 3};
    auto plan = LocalPlanGrid::computational(3, 3, 2);
    for (int c = 0; c < 3; ++c)
        for (int i = 0; i < 3; ++i) EXPECT_EQ(fourier_mass(inst, plan, {{c, i}}), 0.0);
}

TEST(FourierMass, MatchesMonteCarlo) {
    struct Case {
        int d;
        std::vector<std::pair<int, int>> W;
    };
    const std::vector<Case> cases{{2, {{0, 0}, {0, 1}}}, {2, {{0, 0}, {1, 0}}}, {3, {{0, 0}, {0, 1}, {1, 1}}}};
    for (std::size_t w = 0; w < cases.size(); ++w) {
        BicliqueInstance inst{2, cases[w].d, 1.0, 2};
        auto plan = LocalPlanGrid::computational(2, 2, cases[w].d);
        const double exact = fourier_mass(inst, plan, cases[w].W);
        auto mc = fourier_mass_mc(inst, plan, cases[w].W, 100000, Rng(50 + w), 1);
        EXPECT_GT(exact, 0.0);
        EXPECT_LT(std::abs(exact - mc.mean), 3 * mc.stderr_) << w << " " << exact << " " << mc.mean;
    }
}

TEST(FourierMass, OddQubitComputationalVanishes) {
    // Each factor is +-(2u - 1) with u uniform on [0, 1]; odd moments are zero.
    BicliqueInstance inst{3, 2, 1.0, 3};
    auto plan = LocalPlanGrid::computational(3, 3, 2);
    EXPECT_NEAR(fourier_mass(inst, plan, {{0, 0}, {0, 1}, {1, 1}}), 0.0, 1e-18);
    EXPECT_NEAR(fourier_mass(inst, plan, {{0, 0}, {1, 1}, {2, 2}}), 0.0, 1e-18);
}

TEST(FourierMass, RelabelingSymmetry) {
    Rng rng(60);
    const Matrix b = haar::haar_unitary(2, rng);
    LocalPlanGrid plan;
    plan.m = 3;
    plan.n = 3;
    plan.d = 2;
    plan.bases.assign(9, b);
    BicliqueInstance inst{3, 2, 1.2, 3};
    EXPECT_EQ(fourier_mass(inst, plan, {{0, 0}, {0, 1}}), fourier_mass(inst, plan, {{2, 0}, {2, 2}}));
    EXPECT_EQ(fourier_mass(inst, plan, {{0, 0}, {1, 0}, {1, 1}}), fourier_mass(inst, plan, {{1, 2}, {2, 1}, {2, 2}}));
}

TEST(FourierMass, KappaScaling) {
    auto plan = LocalPlanGrid::computational(2, 3, 3);
    BicliqueInstance a{3, 3, 0.6, 2}, b{3, 3, 1.2, 2};
    // copies {0, 1}, sites {0, 1}: exponent 2*2 + 2*2
    const std::vector<std::pair<int, int>> W{{0, 0}, {0, 1}, {1, 1}};
    const double ratio = fourier_mass(b, plan, W) / fourier_mass(a, plan, W);
    EXPECT_NEAR(ratio, 256.0, 256.0 * 1e-12);
    const std::vector<std::pair<int, int>> W2{{0, 0}, {0, 2}};
    EXPECT_NEAR(fourier_mass(b, plan, W2) / fourier_mass(a, plan, W2), 64.0, 64.0 * 1e-12);
}

TEST(MassBudget, Properties) {
    EXPECT_EQ(low_degree_mass_budget(BicliqueInstance{8, 2, 0.0, 8}, 3), 0.0);
    double prev = 0.0;
    for (double lam : {0.5, 1.0, 2.0, 4.0}) {
        const double v = low_degree_mass_budget(BicliqueInstance{8, 2, lam, 8}, 3);
        EXPECT_GT(v, prev);
        prev = v;
    }
    prev = std::numeric_limits<double>::infinity();
    for (int d : {2, 4, 16, 64}) {
        const double v = low_degree_mass_budget(BicliqueInstance{8, d, 2.0, 8}, 3);
        EXPECT_LT(v, prev);
        prev = v;
    }
}

TEST(MassBudget, TinyExactSumBelowBudget) {
    auto plan = LocalPlanGrid::computational(2, 2, 2);
    for (double lam : {0.25, 0.5, 1.0, 1.5, 2.0}) {
        BicliqueInstance inst{2, 2, lam, 2};
        std::vector<std::pair<int, int>> pos{{0, 0}, {0, 1}, {1, 0}, {1, 1}};
        double sum = 0.0;
        for (std::size_t a = 0; a < pos.size(); ++a) {
            sum += fourier_mass(inst, plan, {pos[a]});
            for (std::size_t b = a + 1; b < pos.size(); ++b) sum += fourier_mass(inst, plan, {pos[a], pos[b]});
        }
        EXPECT_LE(sum, low_degree_mass_budget(inst, 2, 8.0)) << lam;
    }
}

TEST(Wilson, KnownInterval) {
    auto w = wilson(5, 10);
    EXPECT_NEAR(w.low, 0.236593, 1e-5);
    EXPECT_NEAR(w.high, 0.763407, 1e-5);
    EXPECT_NEAR(wilson(0, 10).low, 0.0, 1e-15);
}

TEST(PhaseDiagram, EmptyAndDeterministic) {
    PhaseGrid g;
    g.n = {16};
    g.d = {2};
    g.lambda = {2.0, 8.0};
    g.detector = Detector::edge_count;
    g.trials = 0;
    EXPECT_TRUE(phase_diagram(g, 1).empty());
    g.trials = 30;
    auto a = phase_csv(phase_diagram(g, 7, 1));
    auto b = phase_csv(phase_diagram(g, 7, 3));
    EXPECT_EQ(a, b);
    EXPECT_EQ(a.substr(0, a.find('\n')), "n,d,lambda,m,detector,trials,power,ci_low,ci_high,seed");
    EXPECT_NE(a, phase_csv(phase_diagram(g, 8, 1)));
}

TEST(PhaseDiagram, CrossoverInterpolation) {
    std::vector<PhaseCell> cells(3);
    cells[0].lambda = 2;
    cells[0].power = 0.1;
    cells[1].lambda = 8;
    cells[1].power = 0.3;
    cells[2].lambda = 32;
    cells[2].power = 0.7;
    auto x = crossover(cells);
    ASSERT_TRUE(x.has_value());
    EXPECT_NEAR(*x, 16.0, 1e-12);
    cells[2].power = 0.4;
    EXPECT_FALSE(crossover(cells).has_value());
}
