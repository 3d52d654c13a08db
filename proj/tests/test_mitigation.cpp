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

#include "qld/haar.hpp"
#include "qld/mitigation.hpp"

using namespace qld;
using namespace qld::mitigation;

namespace {

DensityOperator zero(int n) {
    return DensityOperator::from_pure(PureState::basis(QuditRegister::uniform(n, 2), 0));
}

Matrix pauli(int which) {
    Matrix p = Matrix::Zero(2, 2);
    switch (which) {
    case 0: p << 1, 0, 0, 1; break;
    case 1: p << 0, 1, 1, 0; break;
    case 2: p << 0, cplx(0, -1), cplx(0, 1), 0; break;
    default: p << 1, 0, 0, -1; break;
    }
    return p;
}

Matrix on_site(const Matrix &p, int site, int n) {
    Matrix out = Matrix::Identity(1, 1);
    for (int q = 0; q < n; ++q) {
        const Matrix f = q == site ? p : Matrix::Identity(2, 2);
        Matrix next(out.rows() * 2, out.cols() * 2);
        for (Eigen::Index i = 0; i < out.rows(); ++i)
            for (Eigen::Index j = 0; j < out.cols(); ++j) next.block(2 * i, 2 * j, 2, 2) = out(i, j) * f;
        out = next;
    }
    return out;
}

// Pauli-twirl form of the single-site channel: (1-k) X + k/4 sum_P P X P.
Matrix oracle_depolarize(const Matrix &x, int n, double kappa) {
    Matrix r = x;
    for (int q = 0; q < n; ++q) {
        Matrix tw = Matrix::Zero(r.rows(), r.cols());
        for (int p = 0; p < 4; ++p) {
            const Matrix P = on_site(pauli(p), q, n);
            tw += P * r * P;
        }
        r = (1.0 - kappa) * r + (kappa / 4.0) * tw;
    }
    return r;
}

double entry_gap(const Matrix &a) { return a.cwiseAbs().maxCoeff(); }

}  // namespace

TEST(NoisyCircuit, NoiselessIsUnitary) {
    Rng rng(1);
    auto spec = haar_circuit(3, 2, 0.0, rng);
    auto in = zero(3);
    auto out = apply_noisy_circuit(spec, in);
    const Matrix c = spec.composite();
    EXPECT_LT(entry_gap(out.rho - c * in.rho * c.adjoint()), 1e-12);
    EXPECT_NEAR(out.purity(), 1.0, 1e-12);
}

TEST(NoisyCircuit, MaximallyMixedIsFixed) {
    Rng rng(2);
    for (double kappa : {0.0, 0.3, 1.0}) {
        auto spec = haar_circuit(3, 3, kappa, rng);
        auto mm = DensityOperator::maximally_mixed(QuditRegister::uniform(3, 2));
        EXPECT_LT(entry_gap(apply_noisy_circuit(spec, mm).rho - mm.rho), 1e-12) << kappa;
    }
}

TEST(NoisyCircuit, FullNoiseMixes) {
    Rng rng(3);
    auto spec = haar_circuit(3, 2, 1.0, rng);
    auto out = apply_noisy_circuit(spec, zero(3));
    EXPECT_LT(entry_gap(out.rho - Matrix::Identity(8, 8) / 8.0), 1e-12);
}

TEST(NoisyCircuit, MatchesPauliTwirlOracle) {
    Rng rng(4);
    const int n = 3;
    auto spec = haar_circuit(n, 3, 0.37, rng);
    Matrix x = zero(n).rho;
    for (const auto &u : spec.blocks) x = oracle_depolarize(u * x * u.adjoint(), n, 0.37);
    EXPECT_LT(entry_gap(apply_noisy_circuit(spec, zero(n)).rho - x), 1e-12);
}

TEST(NoisyCircuit, NoisePlacementList) {
    Rng rng(5);
    const int n = 2;
    auto spec = haar_circuit(n, 3, 0.5, rng);
    spec.noise_after = {1};
    Matrix x = zero(n).rho;
    for (int b = 0; b < 3; ++b) {
        x = spec.blocks[b] * x * spec.blocks[b].adjoint();
        if (b == 1) x = oracle_depolarize(x, n, 0.5);
    }
    EXPECT_LT(entry_gap(apply_noisy_circuit(spec, zero(n)).rho - x), 1e-12);
    spec.noise_after = {3};
    EXPECT_THROW(apply_noisy_circuit(spec, zero(n)), std::invalid_argument);
}

TEST(NoisyCircuit, PurityNonIncreasingPerLayer) {
    Rng rng(6);
    auto spec = haar_circuit(3, 4, 0.1, rng);
    double prev = 1.0;
    for (int l = 1; l <= 4; ++l) {
        auto part = spec;
        part.blocks.resize(l);
        const double p = apply_noisy_circuit(part, zero(3)).purity();
        EXPECT_LE(p, prev + 1e-12);
        prev = p;
    }
}

TEST(NoisyCircuit, AlternativeInputUndoesCircuit) {
    Rng rng(7);
    auto spec = haar_circuit(2, 2, 0.0, rng);
    spec.input = InputKind::alternative;
    auto out = apply_noisy_circuit(spec, input_state(spec));
    EXPECT_NEAR(out.rho(0, 0).real(), 1.0, 1e-12);
    spec.input = InputKind::null_input;
    EXPECT_LT(entry_gap(input_state(spec).rho - Matrix::Identity(4, 4) / 4.0), 1e-15);
}

TEST(NoisyCircuit, Validation) {
    NoisyCircuitSpec s;
    s.n = 2;
    s.kappa = 1.5;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.kappa = 0.1;
    s.blocks.push_back(Matrix::Identity(2, 2));
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.blocks[0] = 2.0 * Matrix::Identity(4, 4);
    EXPECT_THROW(s.validate(), std::invalid_argument);
    Rng rng(0);
    EXPECT_THROW(haar_circuit(11, 1, 0.1, rng), ResourceError);
}

TEST(Purity, Constant) {
    EXPECT_DOUBLE_EQ(purity_constant(0.0), 1.0);
    EXPECT_DOUBLE_EQ(purity_constant(1.0), 0.25);
    EXPECT_DOUBLE_EQ(purity_constant(0.5), (1.0 + 0.75) / 4.0);
}

TEST(Purity, NoiselessIsPure) {
    auto r = purity_decay_check(3, 2, 0.0, 20, Rng(8));
    EXPECT_DOUBLE_EQ(r.bound, 1.0);
    EXPECT_NEAR(r.mean, 1.0, 1e-12);
    EXPECT_TRUE(r.pass);
}

TEST(Purity, FullNoise) {
    auto r = purity_decay_check(3, 1, 1.0, 20, Rng(9));
    EXPECT_NEAR(r.mean, 1.0 / 8.0, 1e-12);
    EXPECT_LE(r.mean, r.bound);
    EXPECT_TRUE(r.pass);
}

TEST(Purity, DecayBound) {
    auto r = purity_decay_check(4, 3, 0.2, 500, Rng(10), 2);
    const double c = (1.0 + 3.0 * 0.64) / 4.0;
    EXPECT_NEAR(r.bound, std::pow(c, 12) * (15.0 / 16.0) + 1.0 / 16.0, 1e-15);
    EXPECT_LE(r.mean, r.bound + 3 * r.stderr_);
    EXPECT_TRUE(r.pass);
}

TEST(Purity, ThreadInvariant) {
    auto a = purity_decay_check(3, 2, 0.3, 40, Rng(11), 1);
    auto b = purity_decay_check(3, 2, 0.3, 40, Rng(11), 3);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.stderr_, b.stderr_);
}

TEST(RBound, ExactExample) {
    const double expect = (1.0 / 8.0) * std::pow(0.25, 4) * (15.0 / 16.0);
    EXPECT_DOUBLE_EQ(r_bound(1, 4, 1, 1.0), expect);
    EXPECT_DOUBLE_EQ(expect, 15.0 / 32768.0);
}

TEST(RBound, SlackTerms) {
    const double c = purity_constant(0.4);
    EXPECT_NEAR(r_bound(2, 5, 3, 0.4, 0.01, 0.002),
                std::ldexp(1.0, -3) * (std::pow(c, 15) * (1.0 - 1.0 / 32) + 3 * 0.01) + 0.002, 1e-15);
}

TEST(RBound, MonotoneInA) {
    for (double kappa : {0.05, 0.3, 1.0})
        for (int a = 0; a < 6; ++a) EXPECT_LT(r_bound(a, 6, 2, kappa), r_bound(a + 1, 6, 2, kappa));
    EXPECT_THROW(r_bound(7, 6, 1, 0.1), std::invalid_argument);
}

TEST(RBound, HaarFactorBelowTwoPower) {
    // Exact Haar coefficient (d_A D - D/d_A)/(D^2 - 1) against 2^{a-n}.
    for (int n = 1; n <= 8; ++n)
        for (int a = 0; a <= n; ++a) {
            const double D = std::ldexp(1.0, n), dA = std::ldexp(1.0, a);
            EXPECT_LE(haar_marginal_deviation(n, a, 1.0) / (1.0 - 1.0 / D), dA / D + 1e-15);
        }
}

TEST(ReducedAudit, MarginalRecursionMonteCarlo) {
    // Direct Monte Carlo of E tr(rho_A^2) - 2^{-a} after one Haar block on a
    // fixed input, against the closed form.
    Rng rng(12);
    const int n = 3;
    const auto reg = QuditRegister::uniform(n, 2);
    Matrix in = zero(n).rho * 0.6 + Matrix::Identity(8, 8) * (0.4 / 8.0);
    const double purity = (in * in).trace().real();
    double s = 0.0;
    const int N = 20000;
    for (int i = 0; i < N; ++i) {
        const Matrix u = haar::haar_unitary(8, rng);
        const Matrix ra = partial_trace(u * in * u.adjoint(), reg, {0});
        s += ra.cwiseAbs2().sum() - 0.5;
    }
    EXPECT_NEAR(s / N, haar_marginal_deviation(n, 1, purity), 0.004);
}

TEST(ReducedAudit, TailBound) {
    auto r = reduced_state_audit(4, 2, 0.3, {0}, 300, Rng(13), 2);
    EXPECT_DOUBLE_EQ(r.R, r_bound(1, 4, 2, 0.3));
    EXPECT_EQ(r.distances.size(), 300u);
    EXPECT_LE(r.exceedance, std::sqrt(r.R) + 3 * r.stderr_);
    EXPECT_TRUE(r.tail_pass);
    EXPECT_TRUE(r.recursion_pass);
    EXPECT_TRUE(r.recursion_le_bound);
    EXPECT_TRUE(r.pass);
    for (double x : r.distances) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 2.0 + 1e-12);
    }
}

TEST(ReducedAudit, Validation) {
    EXPECT_THROW(reduced_state_audit(4, 2, 0.3, {}, 10, Rng(0)), std::invalid_argument);
    EXPECT_THROW(reduced_state_audit(4, 2, 0.3, {0, 0}, 10, Rng(0)), std::invalid_argument);
    EXPECT_THROW(reduced_state_audit(4, 2, 0.3, {4}, 10, Rng(0)), std::invalid_argument);
    EXPECT_THROW(reduced_state_audit(4, 0, 0.3, {0}, 10, Rng(0)), std::invalid_argument);
}

TEST(Hypothesis, NoiselessInvertedIsMaximal) {
    const auto reg = QuditRegister::uniform(3, 2);
    auto plan = lowdeg::computational_plan(reg, 1);
    auto r = hypothesis_test_sim(3, 2, 0.0, plan, 1, 4, Rng(14));
    EXPECT_NEAR(r.normalized, 1.0, 1e-10);
    EXPECT_NEAR(r.report.extra("normalized"), 1.0, 1e-10);
}

TEST(Hypothesis, FullNoiseIsZero) {
    const auto reg = QuditRegister::uniform(3, 2);
    Rng prng(15);
    auto plan = lowdeg::random_local_plan(reg, 2, prng);
    auto r = hypothesis_test_sim(3, 1, 1.0, plan, 2, 4, Rng(16));
    EXPECT_NEAR(r.report.total, 0.0, 1e-12);
    EXPECT_NEAR(r.normalized, 0.0, 1e-12);
}

TEST(Hypothesis, AdvantageBelowBudget) {
    const auto reg = QuditRegister::uniform(4, 2);
    Rng prng(17);
    auto plan = lowdeg::random_local_plan(reg, 1, prng);
    auto r = hypothesis_test_sim(4, 2, 0.3, plan, 2, 50, Rng(18));
    EXPECT_GT(r.budget, 0.0);
    EXPECT_LE(r.report.total, r.budget);
    EXPECT_GE(r.normalized, 0.0);
    EXPECT_LE(r.normalized, 1.0 + 1e-12);
}

TEST(Hypothesis, RejectsAncillaPlans) {
    const auto reg = QuditRegister::uniform(2, 2);
    auto plan = lowdeg::global_plan(reg, 1, 1, {Matrix::Identity(8, 8)});
    EXPECT_THROW(hypothesis_test_sim(2, 1, 0.1, plan, 1, 2, Rng(0)), std::invalid_argument);
}
