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
#include <functional>

#include "qld/haar.hpp"

using namespace qld;
using namespace qld::haar;

namespace {

Rational rising(long d, long k) {
    Rational r = 1;
    for (long j = 0; j < k; ++j) r *= d + j;
    return r;
}

Rational pow_q(long base, long e) {
    Rational r = 1;
    for (long j = 0; j < e; ++j) r *= base;
    return r;
}

// Coefficient of x^a in prod_{j<s} 1/(1 + j x), expanded as truncated power series.
Rational series_oracle(long s, long a) {
    std::vector<Rational> poly(a + 1, Rational(0));
    poly[0] = 1;
    for (long j = 0; j < s; ++j) {
        std::vector<Rational> next(a + 1, Rational(0));
        for (long p = 0; p <= a; ++p) {
            Rational term = 1;
            for (long q = 0; p + q <= a; ++q) {
                next[p + q] += poly[p] * term;
                term *= -j;
            }
        }
        poly = next;
    }
    return poly[a];
}

Matrix mc_moment(int d, int k, std::size_t N, Rng &rng) {
    const auto D = static_cast<Eigen::Index>(ipow(d, k));
    Matrix acc = Matrix::Zero(D, D);
    for (std::size_t i = 0; i < N; ++i) {
        Vector v = haar_vector(d, rng);
        Vector p = v;
        for (int j = 1; j < k; ++j) p = kron(p, v);
        acc.noalias() += p * p.adjoint();
    }
    return acc / static_cast<double>(N);
}

std::vector<std::vector<int>> partitions_of(int k) {
    std::vector<std::vector<int>> out;
    std::function<void(int, int, std::vector<int> &)> rec = [&](int rem, int maxp, std::vector<int> &cur) {
        if (rem == 0) {
            out.push_back(cur);
            return;
        }
        for (int p = std::min(rem, maxp); p >= 1; --p) {
            cur.push_back(p);
            rec(rem - p, p, cur);
            cur.pop_back();
        }
    };
    std::vector<int> cur;
    rec(k, k, cur);
    return out;
}

}  // namespace

TEST(HaarSample, FirstMomentQubit) {
    Rng rng(1);
    Matrix acc = Matrix::Zero(2, 2);
    const int N = 100000;
    for (int i = 0; i < N; ++i) {
        auto psi = haar_sample(2, rng);
        EXPECT_NEAR(psi.amp.norm(), 1.0, 1e-12);
        acc += psi.amp * psi.amp.adjoint();
    }
    acc /= N;
    Eigen::SelfAdjointEigenSolver<Matrix> es(acc - Matrix::Identity(2, 2) / 2.0);
    EXPECT_LT(es.eigenvalues().cwiseAbs().maxCoeff(), 0.01);
}

TEST(HaarSample, FourthPowerOverlapQutrit) {
    Rng rng(2);
    const int N = 100000;
    double s1 = 0, s2 = 0;
    for (int i = 0; i < N; ++i) {
        const double x = std::pow(std::norm(haar_sample(3, rng).amp(0)), 2);
        s1 += x;
        s2 += x * x;
    }
    const double mean = s1 / N, sd = std::sqrt((s2 / N - mean * mean) / N);
    EXPECT_LT(std::abs(mean - 1.0 / 6.0), 3 * sd);
    EXPECT_EQ(mixed_overlap_moment(3, {2}), Rational(1, 6));
}

TEST(HaarSample, SeedReproducible) {
    Rng a(77), b(77);
    EXPECT_EQ(haar_sample(4, a).amp, haar_sample(4, b).amp);
    EXPECT_THROW(haar_sample(1, a), std::invalid_argument);
}

TEST(HaarUnitary, IsUnitary) {
    Rng rng(3);
    for (int i = 0; i < 10; ++i) EXPECT_TRUE(is_unitary(haar_unitary(4, rng), 1e-12));
}

TEST(Moment, Examples) {
    EXPECT_LT(max_abs(moment_operator(2, 1).matrix - Matrix::Identity(2, 2) / 2.0), 1e-15);
    const Matrix m = moment_operator(2, 2).matrix;
    const Matrix oracle = (Matrix::Identity(4, 4) + permutation_operator(2, {1, 0})) / 6.0;
    EXPECT_LT(max_abs(m - oracle), 1e-15);
    EXPECT_NEAR(m(0, 0).real(), 1.0 / 3.0, 1e-15);
    EXPECT_NEAR(m(1, 1).real(), 1.0 / 6.0, 1e-15);
    EXPECT_NEAR(moment_operator(3, 2).matrix.trace().real(), 1.0, 1e-14);
}

TEST(Moment, TraceIsExactlyOne) {
    for (int d = 2; d <= 5; ++d)
        for (int k = 1; k <= 4; ++k) EXPECT_EQ(moment_trace_exact(d, k), Rational(1));
}

TEST(Moment, MatchesMonteCarlo) {
    Rng rng(4);
    for (int d : {2, 3})
        for (int k : {1, 2, 3}) {
            Rng r = rng.derive(d * 10 + k);
            EXPECT_LT(max_abs(mc_moment(d, k, 100000, r) - moment_operator(d, k).matrix), 0.02) << d << "," << k;
        }
}

TEST(MixedOverlap, ClosedForm) {
    EXPECT_EQ(mixed_overlap_moment(2, {1}), Rational(1, 2));
    EXPECT_EQ(mixed_overlap_moment(2, {1, 1}), Rational(1, 6));
    EXPECT_EQ(mixed_overlap_moment(4, {2}), Rational(1, 10));
    EXPECT_THROW(mixed_overlap_moment(2, {2, 1}), std::domain_error);
    for (int d = 2; d <= 4; ++d)
        for (int k = 1; k <= std::min(d, 3); ++k)
            for (const auto &lam : partitions_of(k)) {
                Rational num = 1;
                for (int p : lam) num *= Rational(factorial(p));
                EXPECT_EQ(mixed_overlap_moment(d, lam), num / rising(d, k));
            }
}

TEST(MixedOverlap, MatchesMonteCarlo) {
    Rng rng(5);
    const int N = 100000;
    for (int d = 2; d <= 4; ++d)
        for (int k = 1; k <= std::min(d, 3); ++k)
            for (const auto &lam : partitions_of(k)) {
                Rng r = rng.derive(d * 100 + k * 10 + static_cast<int>(lam.size()));
                double s1 = 0, s2 = 0;
                for (int i = 0; i < N; ++i) {
                    Vector v = haar_vector(d, r);
                    double x = 1.0;
                    for (std::size_t l = 0; l < lam.size(); ++l) x *= std::pow(std::norm(v(l)), lam[l]);
                    s1 += x;
                    s2 += x * x;
                }
                const double mean = s1 / N, sd = std::sqrt(std::max(1e-300, s2 / N - mean * mean) / N);
                EXPECT_LT(std::abs(mean - to_double(mixed_overlap_moment(d, lam))), 3 * sd + 1e-12);
            }
}

TEST(Beta, DefinitionAndExample) {
    EXPECT_EQ(beta(2, 2).value, Rational(2, 3));
    for (long d = 2; d <= 20; d += 3)
        for (long s = 0; s <= 8; ++s) EXPECT_EQ(beta(d, s).value, pow_q(d, s) / rising(d, s));
    EXPECT_EQ(beta(7, 0).value, Rational(1));
}

TEST(Beta, SeriesCoefficientsMatchProductExpansion) {
    for (long s = 0; s <= 6; ++s)
        for (long a = 0; a <= 4; ++a) EXPECT_EQ(beta_series_coefficient(s, a), series_oracle(s, a)) << s << "," << a;
    for (long a = 1; a <= 6; ++a) EXPECT_EQ(beta_series_coefficient(0, a), Rational(0));
}

TEST(Beta, CoefficientGrowthBound) {
    for (long s = 0; s <= 6; ++s)
        for (long a = 0; a <= 4; ++a) {
            Rational c = beta_series_coefficient(s, a);
            EXPECT_LE(abs(c), pow_q(1 + s, 2 * a));
        }
}

TEST(Beta, PartialSumsConverge) {
    for (long d : {16, 32, 64})
        for (long s = 1; s <= 6; ++s)
            for (long A = 1; A <= 4; ++A) {
                Rational err = abs(beta_series_partial(d, s, A) - beta(d, s).value);
                Rational next = abs(beta_series_coefficient(s, A + 1)) / pow_q(d, A + 1);
                EXPECT_TRUE(next == 0 ? err == 0 : err < 2 * next) << d << " " << s << " " << A;
            }
}

TEST(Gamma, CenteredTwoCopyClosedForm) {
    for (int d : {2, 3, 4}) {
        const Matrix I = Matrix::Identity(d * d, d * d);
        const Matrix oracle = d * (I + permutation_operator(d, {1, 0})) / static_cast<double>(d + 1) - I;
        EXPECT_LT(max_abs(centered_moment_operator(d, 2).matrix - oracle), 1e-14);
    }
    EXPECT_EQ(gamma(2, 2, 2).value, Rational(-1, 3));
    EXPECT_EQ(gamma(2, 2, 0).value, Rational(2, 3));
}

TEST(Gamma, FirstOrderVanishes) {
    for (int d : {2, 3, 5}) EXPECT_LT(max_abs(centered_moment_operator(d, 1).matrix), 1e-15);
}

TEST(Gamma, TwoAssembliesAgree) {
    for (int d : {2, 3})
        for (int t = 1; t <= 4; ++t)
            EXPECT_LT(max_abs(centered_moment_operator(d, t).matrix - centered_moment_operator_beta_form(d, t).matrix),
                      1e-12);
}

TEST(Gamma, MatchesBinomialSum) {
    for (long d : {2, 3, 7})
        for (long t = 1; t <= 6; ++t)
            for (long f = 0; f <= t; ++f) {
                Rational s = 0;
                for (long r = 0; r <= f; ++r)
                    s += (r % 2 ? -1 : 1) * Rational(binomial(f, r)) * pow_q(d, t - r) / rising(d, t - r);
                EXPECT_EQ(gamma(d, t, f).value, s);
            }
}

TEST(Gamma, ZeroFixedPointEquality) {
    EXPECT_EQ(abs(gamma(3, 3, 0).value), Rational(9, 20));
    for (long d : {2, 5, 64})
        for (long t = 1; t <= 6; ++t) EXPECT_EQ(abs(gamma(d, t, 0).value), pow_q(d, t) / rising(d, t));
}

TEST(Gamma, CalibratedBound) {
    for (long d : {64, 128, 256, 1024})
        for (long t = 1; t <= 6; ++t)
            for (long f = 0; f <= t; ++f) EXPECT_TRUE(gamma_bound_holds(d, t, f, 4)) << d << " " << t << " " << f;
}

TEST(Derangement, SwapComputationalQubits) {
    const Matrix I2 = Matrix::Identity(2, 2);
    auto r = derangement_overlap_bound_check(2, {I2, I2}, {1, 0});
    // <x1 x2|SWAP|x1 x2> = [x1 == x2]; averaged over the four pairs.
    EXPECT_NEAR(r.lhs, 0.5, 1e-15);
    EXPECT_NEAR(r.rhs, 0.5, 1e-15);
    EXPECT_TRUE(r.pass);
}

TEST(Derangement, ThreeCycle) {
    const Matrix I2 = Matrix::Identity(2, 2);
    auto r = derangement_overlap_bound_check(2, {I2, I2, I2}, {1, 2, 0});
    EXPECT_NEAR(r.lhs, 0.25, 1e-15);
    EXPECT_NEAR(r.rhs, std::pow(2.0, -1.5), 1e-15);
    EXPECT_TRUE(r.pass);
}

TEST(Derangement, RandomBasesAndErrors) {
    Rng rng(6);
    for (int d : {2, 3})
        for (int w = 2; w <= 4; ++w)
            for (const auto &p : all_permutations(w)) {
                if (count_fixed_points(p) > 0) continue;
                std::vector<Matrix> bases;
                for (int i = 0; i < w; ++i) bases.push_back(haar_unitary(d, rng));
                auto r = derangement_overlap_bound_check(d, bases, p);
                EXPECT_GE(r.lhs, 0.0);
                EXPECT_TRUE(r.pass) << d << " " << w;
            }
    const Matrix I2 = Matrix::Identity(2, 2);
    EXPECT_THROW(derangement_overlap_bound_check(2, {I2, I2}, {0, 1}), std::invalid_argument);
}

TEST(Bell, KnownValues) {
    const long expected[] = {1, 1, 2, 5, 15, 52, 203, 877};
    for (int n = 0; n < 8; ++n) {
        EXPECT_EQ(bell_number(n), Integer(expected[n]));
        EXPECT_EQ(static_cast<long>(set_partitions(n).size()), expected[n]);
        EXPECT_LE(bell_number(n), factorial(n));
    }
}

TEST(CopyMoment, HaarFirstOrderVanishes) {
    for (long D : {2, 4, 8}) EXPECT_EQ(haar_copy_moment(D, 1), Rational(0));
}

TEST(CopyMoment, PairOverlapPowerMatchesSequenceSum) {
    // D^j / (D...(D+j-1))^2 * sum over outcome sequences of prod_y (#y)!^2.
    for (long D = 1; D <= 4; ++D)
        for (int j = 0; j <= 6; ++j) {
            long total = 1;
            for (int i = 0; i < j; ++i) total *= D;
            Integer sum = 0;
            for (long seq = 0; seq < total; ++seq) {
                std::vector<int> cnt(D, 0);
                long x = seq;
                for (int i = 0; i < j; ++i) {
                    ++cnt[x % D];
                    x /= D;
                }
                Integer term = 1;
                for (int c : cnt) term *= factorial(c) * factorial(c);
                sum += term;
            }
            Rational expect = pow_q(D, j) * Rational(sum) / (rising(D, j) * rising(D, j));
            EXPECT_EQ(haar_pair_overlap_power(D, j), expect) << D << " " << j;
        }
}

TEST(CopyMoment, HighPowersStayCheap) {
    EXPECT_GT(haar_copy_moment(2, 16), Rational(0));
    EXPECT_GT(haar_copy_moment(4096, 8), Rational(0));
}
