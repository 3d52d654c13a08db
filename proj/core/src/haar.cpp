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

#include "qld/haar.hpp"

#include <cmath>
#include <functional>
#include <map>

namespace qld::haar {

Vector haar_vector(std::size_t dim, Rng &rng) {
    Vector v(dim);
    for (std::size_t i = 0; i < dim; ++i) v(i) = rng.complex_normal();
    return v / v.norm();
}

PureState haar_sample(int d, Rng &rng) {
    if (d < 2) throw std::invalid_argument("haar_sample: d must be >= 2");
    return PureState(QuditRegister::uniform(1, d), haar_vector(d, rng));
}

PureState haar_sample(const QuditRegister &reg, Rng &rng) {
    check_dimension(reg.total_dim(), "haar_sample");
    return PureState(reg, haar_vector(reg.total_dim(), rng));
}

Matrix haar_unitary(std::size_t dim, Rng &rng) {
    check_dimension(dim, "haar_unitary");
    const auto n = static_cast<Eigen::Index>(dim);
    Matrix g(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.complex_normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix &r = qr.matrixQR();
    for (Eigen::Index j = 0; j < n; ++j) {
        double a = std::abs(r(j, j));
        cplx phase = a > 0 ? r(j, j) / a : cplx(1.0);
        q.col(j) *= phase;
    }
    return q;
}

namespace {

void accumulate_permutation(Matrix &m, int d, const std::vector<int> &perm, cplx coef) {
    auto map = permutation_index_map(d, perm);
    for (std::size_t j = 0; j < map.size(); ++j) m(map[j], j) += coef;
}

std::size_t power_dim(int d, int t, const char *what) {
    std::size_t dim = 1;
    for (int i = 0; i < t; ++i) {
        dim *= static_cast<std::size_t>(d);
        check_dimension(dim, what);
    }
    return dim;
}

}  // namespace

MomentOperator moment_operator(int d, int k) {
    if (d < 1 || k < 0) throw std::invalid_argument("moment_operator: invalid arguments");
    const auto dim = static_cast<Eigen::Index>(power_dim(d, k, "moment_operator"));
    Matrix m = Matrix::Zero(dim, dim);
    if (k == 0) {
        m(0, 0) = 1.0;
        return {d, k, m};
    }
    for (const auto &perm : all_permutations(k)) accumulate_permutation(m, d, perm, 1.0);
    m /= rising_factorial(d, k).get_d();
    return {d, k, m};
}

Rational moment_trace_exact(int d, int k) {
    Rational sum = 0;
    for (const auto &perm : all_permutations(k)) {
        Integer p = 1;
        for (int c = count_cycles(perm); c > 0; --c) p *= d;
        sum += Rational(p);
    }
    return sum / Rational(rising_factorial(d, k));
}

Rational mixed_overlap_moment(int d, const std::vector<int> &partition) {
    long k = 0;
    Integer num = 1;
    for (int part : partition) {
        if (part < 0) throw std::invalid_argument("mixed_overlap_moment: negative part");
        k += part;
        num *= factorial(part);
    }
    if (k > d) throw std::domain_error("mixed_overlap_moment: total order exceeds the dimension");
    Rational out(num, rising_factorial(d, k));
    out.canonicalize();
    return out;
}

BetaCoefficient beta(long d, long s) {
    if (d < 1 || s < 0) throw std::invalid_argument("beta: requires d >= 1 and s >= 0");
    Integer num;
    mpz_ui_pow_ui(num.get_mpz_t(), d, s);
    Rational v(num, rising_factorial(d, s));
    v.canonicalize();
    return {d, s, v};
}

namespace {

// sigma_i(s) = sum_{j=1}^{s-1} j^{i-1}
Integer power_sum(long s, long i) {
    Integer acc = 0;
    for (long j = 1; j < s; ++j) {
        Integer p;
        mpz_ui_pow_ui(p.get_mpz_t(), j, i - 1);
        acc += p;
    }
    return acc;
}

}  // namespace

Rational beta_series_coefficient(long s, long a) {
    if (s < 0 || a < 0) throw std::invalid_argument("beta_series_coefficient: negative argument");
    if (a == 0) return 1;
    std::vector<Integer> sigma(a + 2);
    for (long i = 2; i <= a + 1; ++i) sigma[i] = power_sum(s, i);

    Rational total = 0;
    // Compositions of a into l positive parts p_j = i_j - 1.
    std::vector<long> parts;
    std::function<void(long, long, Rational)> rec = [&](long remaining, long l, Rational acc) {
        if (remaining == 0) {
            Rational term = acc / Rational(factorial(l));
            total += term;
            return;
        }
        for (long p = 1; p <= remaining; ++p) {
            Rational step(sigma[p + 1], Integer(p));
            step.canonicalize();
            rec(remaining - p, l + 1, acc * step);
        }
    };
    rec(a, 0, Rational(1));
    if (a % 2) total = -total;
    total.canonicalize();
    return total;
}

Rational beta_series_partial(long d, long s, long terms) {
    Rational sum = 1;
    Rational dinv(Integer(1), Integer(d));
    dinv.canonicalize();
    Rational pw = 1;
    for (long a = 1; a <= terms; ++a) {
        pw *= dinv;
        sum += beta_series_coefficient(s, a) * pw;
    }
    return sum;
}

GammaCoefficient gamma(long d, long t, long f) {
    if (f < 0 || f > t) throw std::invalid_argument("gamma: fixed-point count outside [0, t]");
    Rational v = 0;
    for (long r = 0; r <= f; ++r) {
        Rational term = Rational(binomial(f, r)) * beta(d, t - r).value;
        if (r % 2)
            v -= term;
        else
            v += term;
    }
    v.canonicalize();
    return {d, t, f, v};
}

MomentOperator centered_moment_operator(int d, int t) {
    if (t < 1 || t > 6) throw std::invalid_argument("centered_moment_operator: t must be in [1, 6]");
    const auto dim = static_cast<Eigen::Index>(power_dim(d, t, "centered_moment_operator"));
    std::vector<double> g(t + 1);
    for (int f = 0; f <= t; ++f) g[f] = gamma(d, t, f).value.get_d();
    Matrix m = Matrix::Zero(dim, dim);
    for (const auto &perm : all_permutations(t)) accumulate_permutation(m, d, perm, g[count_fixed_points(perm)]);
    return {d, t, m};
}

MomentOperator centered_moment_operator_beta_form(int d, int t) {
    if (t < 1 || t > 6) throw std::invalid_argument("centered_moment_operator: t must be in [1, 6]");
    const auto dim = static_cast<Eigen::Index>(power_dim(d, t, "centered_moment_operator"));
    Matrix m = Matrix::Zero(dim, dim);
    for (unsigned mask = 0; mask < (1u << t); ++mask) {
        std::vector<int> members;
        for (int a = 0; a < t; ++a)
            if (mask & (1u << a)) members.push_back(a);
        const int u = static_cast<int>(members.size());
        double coef = beta(d, u).value.get_d() * (((t - u) % 2) ? -1.0 : 1.0);
        for (const auto &sub : all_permutations(u)) {
            std::vector<int> perm(t);
            for (int a = 0; a < t; ++a) perm[a] = a;
            for (int j = 0; j < u; ++j) perm[members[j]] = members[sub[j]];
            accumulate_permutation(m, d, perm, coef);
        }
    }
    return {d, t, m};
}

bool gamma_bound_holds(long d, long t, long f, long C) {
    Rational g = gamma(d, t, f).value;
    Rational lhs = g * g;
    Rational base(Integer(C * C * t * t), Integer(d));
    base.canonicalize();
    Rational rhs = 1;
    for (long i = 0; i < f; ++i) rhs *= base;
    return lhs <= rhs;
}

DerangementCheck derangement_overlap_bound_check(int d, const std::vector<Matrix> &bases,
                                                 const std::vector<int> &perm) {
    const int w = static_cast<int>(perm.size());
    if (static_cast<int>(bases.size()) != w) throw std::invalid_argument("derangement check: one basis per position");
    if (w < 1 || w > 5) throw std::invalid_argument("derangement check: |W| must be in [1, 5]");
    if (count_fixed_points(perm) > 0) throw std::invalid_argument("derangement check: permutation has a fixed point");
    for (const auto &b : bases)
        if (b.rows() != d || !is_unitary(b)) throw std::invalid_argument("derangement check: bases must be d x d unitaries");
    std::vector<int> inv(w);
    for (int a = 0; a < w; ++a) inv[perm[a]] = a;

    QuditRegister reg = QuditRegister::uniform(w, d);
    double acc = 0.0;
    for (std::size_t i = 0; i < reg.total_dim(); ++i) {
        auto x = reg.digits(i);
        cplx v = 1.0;
        for (int b = 0; b < w; ++b) {
            int a = inv[b];
            v *= bases[b].col(x[b]).dot(bases[a].col(x[a]));
        }
        acc += std::norm(v);
    }
    DerangementCheck out;
    out.lhs = acc / static_cast<double>(reg.total_dim());
    out.rhs = std::pow(static_cast<double>(d), -0.5 * w);
    out.pass = out.lhs <= out.rhs + 1e-12;
    return out;
}

Integer stirling2(int n, int k) {
    if (n < 0 || k < 0) return 0;
    std::vector<std::vector<Integer>> s(n + 1, std::vector<Integer>(n + 1, 0));
    s[0][0] = 1;
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= i; ++j) s[i][j] = Integer(j) * s[i - 1][j] + s[i - 1][j - 1];
    return k <= n ? s[n][k] : Integer(0);
}

Integer bell_number(int n) {
    Integer b = 0;
    for (int k = 0; k <= n; ++k) b += stirling2(n, k);
    return b;
}

std::vector<std::vector<int>> set_partitions(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> a(n, 0);
    std::function<void(int, int)> rec = [&](int i, int maxlabel) {
        if (i == n) {
            out.push_back(a);
            return;
        }
        for (int l = 0; l <= maxlabel + 1; ++l) {
            a[i] = l;
            rec(i + 1, std::max(maxlabel, l));
        }
    };
    if (n == 0) {
        out.push_back({});
        return out;
    }
    a[0] = 0;
    rec(1, 0);
    return out;
}

Rational haar_pair_overlap_power(long D, int j) {
    if (D < 1 || j < 0) throw std::invalid_argument("haar_pair_overlap_power: need D >= 1 and j >= 0");
    if (j == 0) return 1;
    // Sequences with count vector c contribute j!/prod c! * prod (c!)^2, so the
    // sum is j! [x^j] (sum_c c! x^c)^D.
    std::vector<Integer> poly(j + 1, Integer(0));
    poly[0] = 1;
    std::vector<Integer> fact(j + 1);
    for (int c = 0; c <= j; ++c) fact[c] = factorial(c);
    for (long b = 0; b < D; ++b) {
        std::vector<Integer> next(j + 1, Integer(0));
        for (int p = 0; p <= j; ++p) {
            if (poly[p] == 0) continue;
            for (int c = 0; p + c <= j; ++c) next[p + c] += poly[p] * fact[c];
        }
        poly.swap(next);
    }
    Integer sum = fact[j] * poly[j];
    Integer dj;
    mpz_ui_pow_ui(dj.get_mpz_t(), D, j);
    Integer rf = rising_factorial(D, j);
    Rational out(dj * sum, rf * rf);
    out.canonicalize();
    return out;
}

Rational haar_copy_moment(long D, int k) {
    Rational total = 0;
    for (int j = 0; j <= k; ++j) {
        Rational term = Rational(binomial(k, j)) * haar_pair_overlap_power(D, j);
        if ((k - j) % 2)
            total -= term;
        else
            total += term;
    }
    total.canonicalize();
    return total;
}

}  // namespace qld::haar
