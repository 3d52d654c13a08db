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
#include "qld/qcore.hpp"

using namespace qld;

namespace {

DensityOperator random_mixed(const QuditRegister &reg, Rng &rng, int rank = 3) {
    const auto D = static_cast<Eigen::Index>(reg.total_dim());
    Matrix m = Matrix::Zero(D, D);
    for (int r = 0; r < rank; ++r) {
        Vector v = haar::haar_vector(reg.total_dim(), rng);
        m += rng.uniform() * v * v.adjoint();
    }
    m /= m.trace().real();
    return DensityOperator(reg, m);
}

Matrix diag2(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

}  // namespace

TEST(Register, TotalDimIsProduct) {
    QuditRegister r({2, 3, 4});
    EXPECT_EQ(r.total_dim(), 24u);
    EXPECT_EQ(r.digits(23), (std::vector<int>{1, 2, 3}));
    EXPECT_EQ(r.index({1, 0, 2}), 14u);
    EXPECT_THROW(QuditRegister({2, 1}), std::invalid_argument);
}

TEST(Tensor, MixedTimesMixed) {
    auto q = QuditRegister::uniform(1, 2);
    auto m = DensityOperator::maximally_mixed(q);
    auto p = tensor_product(m, m);
    EXPECT_EQ(p.reg, QuditRegister::uniform(2, 2));
    EXPECT_LT(max_abs(p.rho - Matrix::Identity(4, 4) / 4.0), 1e-15);
}

TEST(Tensor, BasisConcatenation) {
    auto q = QuditRegister::uniform(1, 2);
    auto p = tensor_product(PureState::basis(q, 0), PureState::basis(q, 1));
    EXPECT_EQ(p.amp.size(), 4);
    EXPECT_EQ(p.amp(1), cplx(1.0, 0.0));
    EXPECT_NEAR(p.amp.norm(), 1.0, 1e-15);
}

TEST(Tensor, TraceOutInvertsProduct) {
    Rng rng(11);
    auto q = QuditRegister::uniform(1, 3);
    auto a = random_mixed(q, rng), b = random_mixed(q, rng);
    auto back = partial_trace(tensor_product(a, b), {0});
    EXPECT_LT(max_abs(back.rho - a.rho), 1e-13);
}

TEST(Tensor, CapViolationIsResourceError) {
    auto q = QuditRegister::uniform(7, 2);
    auto m = DensityOperator::maximally_mixed(q);
    EXPECT_THROW(tensor_product(m, m), ResourceError);
}

TEST(PartialTrace, BellMarginal) {
    auto q = QuditRegister::uniform(2, 2);
    Vector v = Vector::Zero(4);
    v(0) = v(3) = 1.0 / std::sqrt(2.0);
    auto bell = DensityOperator::from_pure(PureState(q, v));
    EXPECT_LT(max_abs(partial_trace(bell, {0}).rho - Matrix::Identity(2, 2) / 2.0), 1e-15);
}

TEST(PartialTrace, KeepAllIsIdentityMap) {
    Rng rng(3);
    auto q = QuditRegister::uniform(2, 2);
    auto s = random_mixed(q, rng);
    EXPECT_LT(max_abs(partial_trace(s, {0, 1}).rho - s.rho), 1e-15);
}

TEST(PartialTrace, ProductFirstFactorRemoved) {
    Rng rng(4);
    auto q = QuditRegister::uniform(1, 2);
    auto rho = random_mixed(q, rng);
    auto zero = DensityOperator::from_pure(PureState::basis(q, 0));
    EXPECT_LT(max_abs(partial_trace(tensor_product(zero, rho), {1}).rho - rho.rho), 1e-15);
}

TEST(PartialTrace, EmptyKeepAndBadSite) {
    Rng rng(5);
    auto q = QuditRegister::uniform(2, 2);
    auto s = random_mixed(q, rng);
    auto e = partial_trace(s, {});
    ASSERT_EQ(e.rho.rows(), 1);
    EXPECT_NEAR(e.rho(0, 0).real(), 1.0, 1e-14);
    EXPECT_THROW(partial_trace(s, {2}), std::invalid_argument);
}

TEST(PartialTrace, Composes) {
    Rng rng(6);
    auto q = QuditRegister::uniform(4, 2);
    for (int rep = 0; rep < 5; ++rep) {
        auto s = random_mixed(q, rng, 5);
        // drop site 1, then (in the 3-site result) drop original site 3
        auto stepwise = partial_trace(partial_trace(s, {0, 2, 3}), {0, 1});
        auto direct = partial_trace(s, {0, 2});
        EXPECT_LT(max_abs(stepwise.rho - direct.rho), 1e-12);
    }
}

TEST(TraceDistance, Examples) {
    auto q = QuditRegister::uniform(1, 2);
    auto z = DensityOperator::from_pure(PureState::basis(q, 0));
    auto o = DensityOperator::from_pure(PureState::basis(q, 1));
    auto mm = DensityOperator::maximally_mixed(q);
    EXPECT_NEAR(trace_distance(z, z), 0.0, 1e-15);
    EXPECT_NEAR(trace_distance(z, o), 1.0, 1e-14);
    // difference diag(1/2, -1/2)
    Eigen::SelfAdjointEigenSolver<Matrix> es(z.rho - mm.rho);
    EXPECT_NEAR(0.5 * es.eigenvalues().cwiseAbs().sum(), 0.5, 1e-15);
    EXPECT_NEAR(trace_distance(z, mm), 0.5, 1e-14);
    EXPECT_THROW(trace_distance(z, DensityOperator::maximally_mixed(QuditRegister::uniform(2, 2))),
                 std::invalid_argument);
}

TEST(TraceDistance, TriangleAndSymmetry) {
    Rng rng(7);
    auto q = QuditRegister::uniform(2, 2);
    for (int rep = 0; rep < 50; ++rep) {
        auto a = random_mixed(q, rng), b = random_mixed(q, rng), c = random_mixed(q, rng);
        EXPECT_NEAR(trace_distance(a, b), trace_distance(b, a), 1e-14);
        EXPECT_LE(trace_distance(a, c), trace_distance(a, b) + trace_distance(b, c) + 1e-10);
    }
}

TEST(Depolarize, Extremes) {
    Rng rng(8);
    auto q = QuditRegister::uniform(2, 3);
    auto s = random_mixed(q, rng);
    EXPECT_LT(max_abs(depolarize(s, 0.0, DepolarizeScope::global).rho - s.rho), 1e-15);
    EXPECT_LT(max_abs(depolarize(s, 1.0, DepolarizeScope::global).rho - Matrix::Identity(9, 9) / 9.0), 1e-15);
    EXPECT_LT(max_abs(depolarize(s, 1.0, DepolarizeScope::per_site).rho - Matrix::Identity(9, 9) / 9.0), 1e-14);
    EXPECT_THROW(depolarize(s, 1.5, DepolarizeScope::global), std::invalid_argument);
    EXPECT_THROW(depolarize(s, -0.1, DepolarizeScope::per_site), std::invalid_argument);
}

TEST(Depolarize, HalfRateOnZero) {
    auto q = QuditRegister::uniform(1, 2);
    auto z = DensityOperator::from_pure(PureState::basis(q, 0));
    EXPECT_LT(max_abs(depolarize(z, 0.5, DepolarizeScope::global).rho - diag2(0.75, 0.25)), 1e-15);
    EXPECT_LT(max_abs(depolarize(z, 0.5, DepolarizeScope::per_site).rho - diag2(0.75, 0.25)), 1e-15);
}

TEST(Depolarize, PerSiteSubsetActsLocally) {
    Rng rng(9);
    auto q = QuditRegister::uniform(2, 2);
    auto a = random_mixed(QuditRegister::uniform(1, 2), rng);
    auto b = random_mixed(QuditRegister::uniform(1, 2), rng);
    auto out = depolarize(tensor_product(a, b), 0.3, DepolarizeScope::per_site, {1});
    auto expect = tensor_product(a, depolarize(b, 0.3, DepolarizeScope::global));
    EXPECT_LT(max_abs(out.rho - expect.rho), 1e-14);
}

TEST(Depolarize, GlobalIsAffine) {
    Rng rng(10);
    auto q = QuditRegister::uniform(2, 2);
    for (int rep = 0; rep < 10; ++rep) {
        auto a = random_mixed(q, rng), b = random_mixed(q, rng);
        const double p = rng.uniform(), k = rng.uniform();
        DensityOperator mix(q, p * a.rho + (1 - p) * b.rho);
        const Matrix lhs = depolarize(mix, k, DepolarizeScope::global).rho;
        const Matrix rhs = p * depolarize(a, k, DepolarizeScope::global).rho + (1 - p) * depolarize(b, k, DepolarizeScope::global).rho;
        EXPECT_LT(max_abs(lhs - rhs), 1e-12);
    }
}

TEST(Permutation, IdentityAndSwap) {
    EXPECT_EQ(max_abs(permutation_operator(3, {0, 1, 2}) - Matrix::Identity(27, 27)), 0.0);
    Matrix swap = permutation_operator(2, {1, 0});
    EXPECT_EQ(swap.trace(), cplx(2.0, 0.0));
    // |01> -> |10>
    EXPECT_EQ(swap(2, 1), cplx(1.0, 0.0));
    EXPECT_EQ(permutation_operator(2, {1, 2, 0}).trace(), cplx(2.0, 0.0));
}

TEST(Permutation, TraceIsPowerOfCycles) {
    for (int t = 1; t <= 5; ++t)
        for (int d = 2; d <= 4; ++d) {
            if (ipow(d, t) > 1024) continue;
            for (const auto &p : all_permutations(t)) {
                const Matrix P = permutation_operator(d, p);
                const long tr = std::lround(P.trace().real());
                EXPECT_EQ(tr, ipow(d, count_cycles(p))) << "d=" << d << " t=" << t;
            }
        }
}

TEST(Permutation, HomomorphismAndUnitary) {
    const int t = 3, d = 2;
    auto perms = all_permutations(t);
    for (const auto &p : perms)
        for (const auto &s : perms) {
            std::vector<int> ps(t);
            for (int a = 0; a < t; ++a) ps[a] = p[s[a]];
            Matrix lhs = permutation_operator(d, p) * permutation_operator(d, s);
            EXPECT_LT(max_abs(lhs - permutation_operator(d, ps)), 1e-15);
            EXPECT_TRUE(is_unitary(permutation_operator(d, p)));
        }
}

TEST(Born, Examples) {
    auto q = QuditRegister::uniform(2, 2);
    Rng rng(12);
    auto mm = DensityOperator::maximally_mixed(q);
    auto meas = ProjectiveMeasurement(q, haar::haar_unitary(4, rng), "random");
    for (double p : born_probabilities(mm, meas)) EXPECT_NEAR(p, 0.25, 1e-14);
    auto zero = DensityOperator::from_pure(PureState::basis(q, 0));
    auto pz = born_probabilities(zero, ProjectiveMeasurement::computational(q));
    EXPECT_NEAR(pz[0], 1.0, 1e-15);
    EXPECT_NEAR(pz[3], 0.0, 1e-15);
    auto q1 = QuditRegister::uniform(1, 2);
    Vector plus = Vector::Constant(2, 1.0 / std::sqrt(2.0));
    auto pp = born_probabilities(DensityOperator::from_pure(PureState(q1, plus)), ProjectiveMeasurement::computational(q1));
    EXPECT_NEAR(pp[0], 0.5, 1e-15);
    EXPECT_NEAR(pp[1], 0.5, 1e-15);
}

TEST(Born, SumsToOne) {
    Rng rng(13);
    auto q = QuditRegister::uniform(2, 3);
    for (int rep = 0; rep < 20; ++rep) {
        auto s = random_mixed(q, rng);
        auto p = born_probabilities(s, ProjectiveMeasurement(q, haar::haar_unitary(9, rng), "u"));
        double tot = 0.0;
        for (double x : p) {
            EXPECT_GE(x, 0.0);
            tot += x;
        }
        EXPECT_NEAR(tot, 1.0, 1e-10);
    }
}

TEST(Sample, DeterministicCases) {
    auto q = QuditRegister::uniform(1, 2);
    auto zero = DensityOperator::from_pure(PureState::basis(q, 0));
    auto comp = ProjectiveMeasurement::computational(q);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed);
        EXPECT_EQ(sample_outcome(zero, comp, rng), 0u);
    }
    auto mm = DensityOperator::maximally_mixed(q);
    Rng a(99), b(99);
    for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_outcome(mm, comp, a), sample_outcome(mm, comp, b));
}

TEST(Sample, MixedQubitFrequency) {
    auto q = QuditRegister::uniform(1, 2);
    auto mm = DensityOperator::maximally_mixed(q);
    auto comp = ProjectiveMeasurement::computational(q);
    Rng rng(2024);
    const int N = 100000;
    int zeros = 0;
    for (int i = 0; i < N; ++i) zeros += sample_outcome(mm, comp, rng) == 0 ? 1 : 0;
    EXPECT_LT(std::abs(zeros - N / 2.0), 3.0 * std::sqrt(N * 0.25));
}

TEST(Outcome, GridReencodesFlatIndex) {
    auto q = QuditRegister::uniform(3, 3);
    auto rec = OutcomeRecord::from_outcomes(q, {0, 5, 26, 13});
    EXPECT_TRUE(rec.consistent(q));
    EXPECT_EQ(rec.grid[2], (std::vector<int>{2, 2, 2}));
    rec.grid[1][0] = 2;
    EXPECT_FALSE(rec.consistent(q));
}

TEST(Invariants, ChannelOutputsValidate) {
    Rng rng(14);
    auto q = QuditRegister::uniform(3, 2);
    for (int rep = 0; rep < 10; ++rep) {
        auto s = random_mixed(q, rng, 4);
        EXPECT_NO_THROW(depolarize(s, rng.uniform(), DepolarizeScope::per_site).validate());
        EXPECT_NO_THROW(depolarize(s, rng.uniform(), DepolarizeScope::global).validate());
        EXPECT_NO_THROW(partial_trace(s, {0, 2}).validate());
        EXPECT_NO_THROW(conjugate(s, haar::haar_unitary(8, rng)).validate());
    }
    Matrix bad = Matrix::Identity(2, 2);
    EXPECT_THROW(DensityOperator(QuditRegister::uniform(1, 2), bad).validate(), std::domain_error);
}
