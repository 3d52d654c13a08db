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

#include "qld/biclique.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "qld/haar.hpp"

namespace qld::biclique {

void BicliqueInstance::validate() const {
    if (n < 1) throw std::invalid_argument("biclique: n must be >= 1");
    if (d < 2) throw std::invalid_argument("biclique: d must be >= 2");
    if (m < 1) throw std::invalid_argument("biclique: m must be >= 1");
    if (!std::isfinite(lambda) || lambda < 0.0 || lambda > n)
        throw std::invalid_argument("biclique: lambda must lie in [0, n]");
}

PlantedSecret sample_secret(const BicliqueInstance &inst, Rng &rng) {
    inst.validate();
    PlantedSecret s;
    s.rho = haar::haar_vector(static_cast<std::size_t>(inst.d), rng);
    const double kappa = inst.kappa();
    for (int i = 0; i < inst.n; ++i)
        if (rng.bernoulli(kappa)) s.S.push_back(i);
    return s;
}

namespace {

std::size_t system_dim(int n, int d, const char *what) {
    std::size_t dim = 1;
    for (int i = 0; i < n; ++i) {
        dim *= static_cast<std::size_t>(d);
        check_dimension(dim, what);
    }
    return dim;
}

Matrix mixed(int d) { return Matrix::Identity(d, d) / static_cast<double>(d); }

// kappa * (rho on mask, I/d elsewhere) + (1 - kappa) I/d^n.
Matrix copy_state(int n, int d, double kappa, const Matrix &rho1, unsigned long mask) {
    Matrix planted = Matrix::Identity(1, 1);
    for (int i = 0; i < n; ++i) planted = kron(planted, (mask >> (n - 1 - i)) & 1UL ? rho1 : mixed(d));
    const auto dim = planted.rows();
    return kappa * planted + (1.0 - kappa) * Matrix::Identity(dim, dim) / static_cast<double>(dim);
}

void check_pure(const Vector &rho, int d) {
    if (rho.size() != d) throw std::invalid_argument("biclique: rho has the wrong dimension");
    if (std::abs(rho.norm() - 1.0) > 1e-9) throw std::invalid_argument("biclique: rho must be normalized");
}

}  // namespace

DensityOperator sample_copy(const BicliqueInstance &inst, const PlantedSecret &secret) {
    inst.validate();
    check_pure(secret.rho, inst.d);
    if (inst.n > 62) throw ResourceError("sample_copy: too many sites");
    system_dim(inst.n, inst.d, "sample_copy");
    unsigned long mask = 0;
    for (int i : secret.S) {
        if (i < 0 || i >= inst.n) throw std::invalid_argument("sample_copy: site outside [0, n)");
        mask |= 1UL << (inst.n - 1 - i);
    }
    Matrix rho1 = secret.rho * secret.rho.adjoint();
    DensityOperator out(QuditRegister::uniform(inst.n, inst.d), copy_state(inst.n, inst.d, inst.kappa(), rho1, mask));
    if (invariant_checks()) out.validate();
    return out;
}

Matrix expected_power(const BicliqueInstance &inst, const Vector &rho, int t) {
    inst.validate();
    check_pure(rho, inst.d);
    if (t < 1) throw std::invalid_argument("expected_power: t must be >= 1");
    const int n = inst.n, d = inst.d;
    system_dim(n * t, d, "expected_power");
    const double kappa = inst.kappa();
    const Matrix delta = rho * rho.adjoint() - mixed(d);
    const unsigned long full = (1UL << n) - 1;
    // Copy factors Delta_T (x) I/d off T, for every nonempty T.
    std::vector<Matrix> factor(full + 1);
    for (unsigned long T = 1; T <= full; ++T) {
        Matrix f = Matrix::Identity(1, 1);
        for (int i = 0; i < n; ++i) f = kron(f, (T >> (n - 1 - i)) & 1UL ? delta : mixed(d));
        factor[T] = f;
    }
    const auto D = static_cast<Eigen::Index>(system_dim(n, d, "expected_power"));
    const Matrix id = Matrix::Identity(D, D) / static_cast<double>(D);
    const auto total = static_cast<Eigen::Index>(system_dim(n * t, d, "expected_power"));
    Matrix out = Matrix::Zero(total, total);
    for (unsigned U = 0; U < (1u << t); ++U) {
        std::vector<int> members;
        for (int l = 0; l < t; ++l)
            if (U & (1u << l)) members.push_back(l);
        std::vector<unsigned long> T(members.size(), 1);
        while (true) {
            unsigned long uni = 0;
            for (auto v : T) uni |= v;
            const double w = std::pow(kappa, static_cast<double>(members.size() + std::popcount(uni)));
            if (w != 0.0) {
                Matrix term = Matrix::Identity(1, 1);
                std::size_t j = 0;
                for (int l = 0; l < t; ++l) {
                    if (j < members.size() && members[j] == l)
                        term = kron(term, factor[T[j++]]);
                    else
                        term = kron(term, id);
                }
                out += w * term;
            }
            std::size_t p = 0;
            while (p < T.size() && T[p] == full) T[p++] = 1;
            if (p == T.size()) break;
            ++T[p];
        }
    }
    return out;
}

Matrix expected_power_direct(const BicliqueInstance &inst, const Vector &rho, int t) {
    inst.validate();
    check_pure(rho, inst.d);
    if (t < 1) throw std::invalid_argument("expected_power_direct: t must be >= 1");
    const int n = inst.n, d = inst.d;
    const auto total = static_cast<Eigen::Index>(system_dim(n * t, d, "expected_power_direct"));
    const double kappa = inst.kappa();
    const Matrix rho1 = rho * rho.adjoint();
    Matrix out = Matrix::Zero(total, total);
    for (unsigned long S = 0; S < (1UL << n); ++S) {
        const int s = std::popcount(S);
        const double w = std::pow(kappa, s) * std::pow(1.0 - kappa, n - s);
        if (w == 0.0) continue;
        Matrix sigma = copy_state(n, d, kappa, rho1, S);
        Matrix p = sigma;
        for (int l = 1; l < t; ++l) p = kron(p, sigma);
        out += w * p;
    }
    return out;
}

const Matrix *LocalPlanGrid::basis(int copy, int site) const {
    if (copy < 0 || copy >= m || site < 0 || site >= n) throw std::out_of_range("LocalPlanGrid: position out of range");
    if (bases.empty()) return nullptr;
    const Matrix &b = bases[static_cast<std::size_t>(copy) * n + site];
    return b.size() == 0 ? nullptr : &b;
}

LocalPlanGrid LocalPlanGrid::computational(int m, int n, int d) {
    LocalPlanGrid g;
    g.m = m;
    g.n = n;
    g.d = d;
    return g;
}

void LocalPlanGrid::validate() const {
    if (m < 1 || n < 1 || d < 2) throw std::invalid_argument("LocalPlanGrid: invalid shape");
    if (!bases.empty() && bases.size() != static_cast<std::size_t>(m) * n)
        throw std::invalid_argument("LocalPlanGrid: need one basis per (copy, site)");
    for (const auto &b : bases)
        if (b.size() != 0 && (b.rows() != d || !is_unitary(b)))
            throw std::invalid_argument("LocalPlanGrid: bases must be d x d unitaries");
}

namespace {

void check_plan(const BicliqueInstance &inst, const LocalPlanGrid &plan) {
    plan.validate();
    if (plan.m != inst.m || plan.n != inst.n || plan.d != inst.d)
        throw std::invalid_argument("biclique: plan shape does not match the instance");
}

// Flat outcome indices when d^n fits comfortably in 64 bits.
void fill_flat(OutcomeRecord &rec, int n, int d) {
    if (n * std::log2(static_cast<double>(d)) >= 62.0) return;
    for (const auto &row : rec.grid) {
        std::size_t x = 0;
        for (int v : row) x = x * d + v;
        rec.outcomes.push_back(x);
    }
}

}  // namespace

OutcomeRecord measure_grid(const BicliqueInstance &inst, const PlantedSecret *secret, const LocalPlanGrid &plan,
                           Rng &rng) {
    inst.validate();
    check_plan(inst, plan);
    const int n = inst.n, d = inst.d;
    std::vector<char> inS(n, 0);
    if (secret) {
        check_pure(secret->rho, d);
        for (int i : secret->S) {
            if (i < 0 || i >= n) throw std::invalid_argument("measure_grid: site outside [0, n)");
            inS[i] = 1;
        }
    }
    const double kappa = inst.kappa();
    OutcomeRecord rec;
    rec.grid.assign(inst.m, std::vector<int>(n, 0));
    std::vector<double> probs(d);
    for (int c = 0; c < inst.m; ++c) {
        const bool planted = secret && rng.bernoulli(kappa);
        for (int i = 0; i < n; ++i) {
            if (planted && inS[i]) {
                const Matrix *b = plan.basis(c, i);
                for (int x = 0; x < d; ++x) {
                    cplx a = b ? b->col(x).dot(secret->rho) : secret->rho(x);
                    probs[x] = std::norm(a);
                }
                rec.grid[c][i] = static_cast<int>(sample_index(probs, rng));
            } else {
                rec.grid[c][i] = static_cast<int>(rng.below(d));
            }
        }
    }
    fill_flat(rec, n, d);
    return rec;
}

OutcomeRecord classical_planted_biclique(int n, int m, double kappa, const std::vector<int> &S, Rng &rng) {
    if (n < 1 || m < 1 || !(kappa >= 0.0 && kappa <= 1.0))
        throw std::invalid_argument("classical_planted_biclique: invalid parameters");
    std::vector<char> inS(n, 0);
    for (int i : S) {
        if (i < 0 || i >= n) throw std::invalid_argument("classical_planted_biclique: site outside [0, n)");
        inS[i] = 1;
    }
    OutcomeRecord rec;
    rec.grid.assign(m, std::vector<int>(n, 0));
    for (int c = 0; c < m; ++c) {
        const bool planted = rng.bernoulli(kappa);
        for (int i = 0; i < n; ++i) rec.grid[c][i] = planted && inS[i] ? 1 : static_cast<int>(rng.below(2));
    }
    fill_flat(rec, n, 2);
    return rec;
}

double swap_null_mean(int d) { return (d + 1.0) / (2.0 * d); }

double swap_alt_mean(int d, double kappa) { return swap_null_mean(d) + kappa * kappa * kappa * (d - 1.0) / (2.0 * d); }

double swap_null_variance(int n, int m, int d) {
    if (n % 2) throw std::invalid_argument("swap: n must be even");
    const double pairs = static_cast<double>(m) * (n / 2);
    if (pairs <= 0) throw std::invalid_argument("swap: need at least one pair");
    const double p0 = swap_null_mean(d);
    return p0 * (1.0 - p0) / pairs;
}

namespace {

std::vector<double> binomial_pmf(int N, double p) {
    std::vector<double> out(N + 1);
    for (int j = 0; j <= N; ++j) {
        double lp = std::lgamma(N + 1.0) - std::lgamma(j + 1.0) - std::lgamma(N - j + 1.0);
        double a = j == 0 ? 0.0 : j * std::log(p);
        double b = j == N ? 0.0 : (N - j) * std::log1p(-p);
        out[j] = (p == 0.0 && j > 0) || (p == 1.0 && j < N) ? 0.0 : std::exp(lp + a + b);
    }
    return out;
}

}  // namespace

double swap_second_moment(const BicliqueInstance &inst) {
    inst.validate();
    if (inst.n % 2) throw std::invalid_argument("swap: n must be even");
    const int half = inst.n / 2;
    const double P = static_cast<double>(inst.m) * half;
    if (P <= 0) throw std::invalid_argument("swap: need at least one pair");
    const double k = inst.kappa();
    const double p0 = swap_null_mean(inst.d);
    const auto pb = binomial_pmf(inst.m, k);
    const auto pq = binomial_pmf(half, k * k);
    double acc = 0.0;
    for (int b = 0; b <= inst.m; ++b)
        for (int q = 0; q <= half; ++q) {
            const double w = pb[b] * pq[q];
            if (w == 0.0) continue;
            const double sure = static_cast<double>(b) * q;
            const double mean = p0 + (1.0 - p0) * sure / P;
            acc += w * (mean * mean + (P - sure) * p0 * (1.0 - p0) / (P * P));
        }
    return acc;
}

double swap_statistic(const std::vector<int> &accepts) {
    if (accepts.empty()) throw std::invalid_argument("swap_statistic: no outcomes");
    double s = 0.0;
    for (int a : accepts) {
        if (a != 0 && a != 1) throw std::invalid_argument("swap_statistic: outcomes must be 0 or 1");
        s += a;
    }
    return s / static_cast<double>(accepts.size());
}

DetectionResult swap_protocol(const BicliqueInstance &inst, const PlantedSecret *secret, Rng &rng) {
    inst.validate();
    if (inst.n % 2) throw std::invalid_argument("swap: n must be even");
    const int half = inst.n / 2;
    std::vector<char> inS(inst.n, 0);
    if (secret)
        for (int i : secret->S) {
            if (i < 0 || i >= inst.n) throw std::invalid_argument("swap: site outside [0, n)");
            inS[i] = 1;
        }
    const double kappa = inst.kappa();
    const double p0 = swap_null_mean(inst.d);
    std::vector<int> accepts;
    accepts.reserve(static_cast<std::size_t>(inst.m) * half);
    for (int c = 0; c < inst.m; ++c) {
        const bool planted = secret && rng.bernoulli(kappa);
        for (int j = 0; j < half; ++j) {
            // Two copies of the same pure state always pass.
            if (planted && inS[2 * j] && inS[2 * j + 1])
                accepts.push_back(1);
            else
                accepts.push_back(rng.bernoulli(p0) ? 1 : 0);
        }
    }
    DetectionResult r;
    r.statistic = swap_statistic(accepts);
    r.null_mean = p0;
    r.null_var = swap_null_variance(inst.n, inst.m, inst.d);
    r.alt_mean = swap_alt_mean(inst.d, kappa);
    r.threshold = 0.5 * (r.null_mean + r.alt_mean);
    r.decision = r.statistic > r.threshold;
    r.rule = "mean acceptance > midpoint of null and planted means";
    return r;
}

namespace {

void check_grid(const BicliqueInstance &inst, const OutcomeRecord &grid) {
    if (grid.grid.size() != static_cast<std::size_t>(inst.m))
        throw std::invalid_argument("biclique: outcome grid has the wrong number of copies");
    for (const auto &row : grid.grid) {
        if (row.size() != static_cast<std::size_t>(inst.n))
            throw std::invalid_argument("biclique: outcome grid has the wrong number of sites");
        for (int v : row)
            if (v < 0 || v >= inst.d) throw std::invalid_argument("biclique: outcome digit out of range");
    }
}

}  // namespace

DetectionResult edge_count_protocol(const BicliqueInstance &inst, const OutcomeRecord &grid, double z) {
    inst.validate();
    check_grid(inst, grid);
    if (!(z > 0)) throw std::invalid_argument("edge_count: z must be positive");
    const int h = inst.d / 2;
    const double p0 = static_cast<double>(h) / inst.d;
    const double cells = static_cast<double>(inst.n) * inst.m;
    double ones = 0.0;
    for (const auto &row : grid.grid)
        for (int v : row) ones += v < h ? 1.0 : 0.0;
    DetectionResult r;
    r.null_mean = cells * p0;
    r.null_var = cells * p0 * (1.0 - p0);
    r.alt_mean = r.null_mean;
    r.statistic = std::abs(ones - r.null_mean);
    r.threshold = z * std::sqrt(r.null_var);
    r.decision = r.statistic > r.threshold;
    r.rule = "|#(digit < floor(d/2)) - nm p0| > z sd";
    return r;
}

// Calibrated by simulation at the scan's reference instance (n = m = 16,
// d = 2, t = t' = 6); see false_positive_rate.
double default_scan_constant() { return 0.633; }

DetectionResult subgraph_scan(const BicliqueInstance &inst, const OutcomeRecord &grid, const ScanCaps &caps) {
    inst.validate();
    check_grid(inst, grid);
    const int t = caps.t, tp = caps.t_prime;
    if (t < 1 || tp < 1 || t > inst.m || tp > inst.n)
        throw std::invalid_argument("subgraph_scan: caps must satisfy 1 <= t <= m and 1 <= t' <= n");
    if (t > 12 || tp > 12) throw ResourceError("subgraph_scan: caps above 12");
    if (binomial_double(inst.n, tp) > 2e6) throw ResourceError("subgraph_scan: too many site subsets");
    const double c = caps.constant > 0 ? caps.constant : default_scan_constant();
    const int h = inst.d / 2;
    const double p0 = static_cast<double>(h) / inst.d;
    const int m = inst.m;
    const std::size_t words = (static_cast<std::size_t>(m) + 63) / 64;
    std::vector<std::vector<std::uint64_t>> col(inst.n, std::vector<std::uint64_t>(words, 0));
    for (int r = 0; r < m; ++r)
        for (int j = 0; j < inst.n; ++j)
            if (grid.grid[r][j] < h) col[j][r / 64] |= std::uint64_t(1) << (r % 64);
    std::vector<std::uint64_t> valid(words, ~std::uint64_t(0));
    if (m % 64) valid.back() = (std::uint64_t(1) << (m % 64)) - 1;

    int bits = 0;
    while ((1 << bits) <= tp) ++bits;
    const double area = static_cast<double>(t) * tp;
    double best = -1e300;
    std::vector<int> idx(tp);
    for (int i = 0; i < tp; ++i) idx[i] = i;
    std::vector<std::uint64_t> cnt(bits);
    std::vector<long> hist(tp + 1);
    while (true) {
        std::fill(hist.begin(), hist.end(), 0);
        for (std::size_t w = 0; w < words; ++w) {
            std::fill(cnt.begin(), cnt.end(), 0);
            for (int j : idx) {
                std::uint64_t carry = col[j][w];
                for (int b = 0; b < bits && carry; ++b) {
                    std::uint64_t nb = cnt[b] ^ carry;
                    carry &= cnt[b];
                    cnt[b] = nb;
                }
            }
            for (int v = 0; v <= tp; ++v) {
                std::uint64_t mask = valid[w];
                for (int b = 0; b < bits; ++b) mask &= (v >> b) & 1 ? cnt[b] : ~cnt[b];
                hist[v] += std::popcount(mask);
            }
        }
        double ones = 0.0, zeros = 0.0;
        long need = t;
        for (int v = tp; v >= 0 && need > 0; --v) {
            long take = std::min<long>(need, hist[v]);
            ones += static_cast<double>(take) * v;
            need -= take;
        }
        need = t;
        for (int v = 0; v <= tp && need > 0; ++v) {
            long take = std::min<long>(need, hist[v]);
            zeros += static_cast<double>(take) * (tp - v);
            need -= take;
        }
        best = std::max({best, ones - area * p0, zeros - area * (1.0 - p0)});
        int p = tp - 1;
        while (p >= 0 && idx[p] == inst.n - tp + p) --p;
        if (p < 0) break;
        ++idx[p];
        for (int q = p + 1; q < tp; ++q) idx[q] = idx[q - 1] + 1;
    }
    DetectionResult r;
    r.statistic = best;
    r.threshold = c * std::pow(area, 0.75) * std::sqrt(std::log(static_cast<double>(inst.n)));
    r.decision = r.statistic > r.threshold;
    r.null_mean = 0.0;
    r.null_var = area * p0 * (1.0 - p0);
    r.alt_mean = 0.0;
    r.rule = "max t x t' excess > c (t t')^(3/4) sqrt(log n)";
    return r;
}

Detector detector_from_string(const std::string &s) {
    if (s == "edge-count") return Detector::edge_count;
    if (s == "subgraph-scan") return Detector::subgraph_scan;
    if (s == "swap") return Detector::swap;
    throw std::invalid_argument("unknown detector '" + s + "'");
}

std::string detector_name(Detector d) {
    switch (d) {
        case Detector::edge_count: return "edge-count";
        case Detector::subgraph_scan: return "subgraph-scan";
        case Detector::swap: return "swap";
    }
    return "unknown";
}

BicliqueInstance default_instance(Detector det) {
    if (det == Detector::subgraph_scan) return {16, 2, 8.0, 16};
    return {64, 2, 32.0, 64};
}

DetectionResult run_detector(Detector det, const BicliqueInstance &inst, const PlantedSecret *secret, Rng &rng,
                             const ScanCaps &caps) {
    if (det == Detector::swap) return swap_protocol(inst, secret, rng);
    auto grid = measure_grid(inst, secret, LocalPlanGrid::computational(inst.m, inst.n, inst.d), rng);
    if (det == Detector::edge_count) return edge_count_protocol(inst, grid);
    return subgraph_scan(inst, grid, caps);
}

double false_positive_rate(Detector det, const BicliqueInstance &inst, std::size_t trials, const Rng &rng, int threads,
                           const ScanCaps &caps) {
    if (trials == 0) throw std::invalid_argument("false_positive_rate: trials must be > 0");
    std::vector<char> hit(trials, 0);
    parallel_for(trials, threads, [&](std::size_t i) {
        Rng r = rng.derive(i);
        hit[i] = run_detector(det, inst, nullptr, r, caps).decision ? 1 : 0;
    });
    std::size_t s = 0;
    for (char h : hit) s += h;
    return static_cast<double>(s) / static_cast<double>(trials);
}

namespace {

struct MassShape {
    int copies = 0;
    int sites = 0;
    std::vector<const Matrix *> bases;
};

MassShape mass_shape(const BicliqueInstance &inst, const LocalPlanGrid &plan, const std::vector<std::pair<int, int>> &W) {
    inst.validate();
    check_plan(inst, plan);
    if (W.empty()) throw std::invalid_argument("fourier_mass: W must be nonempty");
    if (W.size() > 5) throw ResourceError("fourier_mass: at most 5 positions");
    auto sorted = W;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw std::invalid_argument("fourier_mass: repeated position");
    MassShape s;
    std::vector<int> cs, ss;
    for (const auto &[c, i] : W) {
        if (c < 0 || c >= inst.m || i < 0 || i >= inst.n) throw std::invalid_argument("fourier_mass: position out of range");
        cs.push_back(c);
        ss.push_back(i);
        s.bases.push_back(plan.basis(c, i));
    }
    std::sort(cs.begin(), cs.end());
    std::sort(ss.begin(), ss.end());
    s.copies = static_cast<int>(std::unique(cs.begin(), cs.end()) - cs.begin());
    s.sites = static_cast<int>(std::unique(ss.begin(), ss.end()) - ss.begin());
    return s;
}

Vector basis_column(const Matrix *b, int d, int x) {
    if (b) return b->col(x);
    Vector e = Vector::Zero(d);
    e(x) = 1.0;
    return e;
}

}  // namespace

double fourier_mass(const BicliqueInstance &inst, const LocalPlanGrid &plan, const std::vector<std::pair<int, int>> &W) {
    auto shape = mass_shape(inst, plan, W);
    const int t = static_cast<int>(W.size());
    const int d = inst.d;
    if (t == 1) return 0.0;
    const std::size_t points = system_dim(t, d, "fourier_mass");
    const double kappa = inst.kappa();
    const double pref = std::pow(kappa, 2.0 * (shape.copies + shape.sites));
    if (pref == 0.0) return 0.0;
    std::vector<double> g(t + 1);
    for (int f = 0; f <= t; ++f) g[f] = haar::gamma(d, t, f).value.get_d();
    const auto perms = all_permutations(t);
    std::vector<int> fix;
    for (const auto &p : perms) fix.push_back(count_fixed_points(p));
    double acc = 0.0;
    std::vector<Vector> phi(t);
    Matrix gram(t, t);
    for (std::size_t x = 0; x < points; ++x) {
        std::size_t rest = x;
        for (int w = t - 1; w >= 0; --w) {
            phi[w] = basis_column(shape.bases[w], d, static_cast<int>(rest % d));
            rest /= d;
        }
        for (int a = 0; a < t; ++a)
            for (int b = 0; b < t; ++b) gram(a, b) = phi[a].dot(phi[b]);
        cplx s = 0.0;
        for (std::size_t p = 0; p < perms.size(); ++p) {
            cplx v = 1.0;
            for (int b = 0; b < t; ++b) v *= gram(b, perms[p][b]);
            s += g[fix[p]] * v;
        }
        acc += std::norm(s);
    }
    return pref * acc / static_cast<double>(points);
}

MassEstimate fourier_mass_mc(const BicliqueInstance &inst, const LocalPlanGrid &plan,
                             const std::vector<std::pair<int, int>> &W, std::size_t pairs, const Rng &rng,
                             int threads) {
    auto shape = mass_shape(inst, plan, W);
    if (pairs < 2) throw std::invalid_argument("fourier_mass_mc: need at least two pairs");
    const int d = inst.d;
    const double pref = std::pow(inst.kappa(), 2.0 * (shape.copies + shape.sites));
    const std::size_t chunks = std::min<std::size_t>(64, pairs);
    std::vector<double> s1(chunks, 0.0), s2(chunks, 0.0);
    parallel_for(chunks, threads, [&](std::size_t c) {
        for (std::size_t s = pairs * c / chunks; s < pairs * (c + 1) / chunks; ++s) {
            Rng r = rng.derive(s);
            Vector a = haar::haar_vector(d, r), b = haar::haar_vector(d, r);
            Matrix da = a * a.adjoint() - mixed(d), db = b * b.adjoint() - mixed(d);
            double prod = 1.0;
            for (const Matrix *B : shape.bases) {
                double cw = 0.0;
                for (int x = 0; x < d; ++x) {
                    Vector e = basis_column(B, d, x);
                    cw += e.dot(da * e).real() * e.dot(db * e).real();
                }
                prod *= d * cw;
            }
            s1[c] += prod;
            s2[c] += prod * prod;
        }
    });
    double t1 = 0.0, t2 = 0.0;
    for (std::size_t c = 0; c < chunks; ++c) {
        t1 += s1[c];
        t2 += s2[c];
    }
    const double N = static_cast<double>(pairs);
    const double mean = t1 / N;
    const double var = std::max(0.0, (t2 / N - mean * mean) * N / (N - 1));
    return {pref * mean, pref * std::sqrt(var / N)};
}

double low_degree_mass_budget(const BicliqueInstance &inst, int k, double C) {
    inst.validate();
    if (k < 0) throw std::invalid_argument("low_degree_mass_budget: k must be >= 0");
    const double kappa = inst.kappa();
    const double ratio = C * std::pow(static_cast<double>(k), 3) / std::sqrt(static_cast<double>(inst.d));
    double total = 0.0;
    for (int t = 1; t <= std::min(k, inst.m); ++t)
        for (int s = 1; s <= std::min(k, inst.n); ++s)
            total += binomial_double(inst.m, t) * binomial_double(inst.n, s) * std::pow(kappa, 2.0 * (s + t)) *
                     std::pow(ratio, t);
    return total;
}

WilsonInterval wilson(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    if (successes > trials) throw std::invalid_argument("wilson: successes exceed trials");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2 * n)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::vector<PhaseCell> phase_diagram(const PhaseGrid &grid, std::uint64_t seed, int threads) {
    if (grid.n.empty() || grid.d.empty() || grid.lambda.empty())
        throw std::invalid_argument("phase_diagram: empty grid axis");
    if (grid.trials == 0) return {};
    Rng root(seed);
    std::vector<PhaseCell> out;
    std::size_t cell = 0;
    for (int n : grid.n)
        for (int d : grid.d)
            for (double lam : grid.lambda) {
                BicliqueInstance inst{n, d, lam, grid.m > 0 ? grid.m : n};
                inst.validate();
                Rng cr = root.derive(cell++);
                std::vector<char> hit(grid.trials, 0);
                parallel_for(grid.trials, threads, [&](std::size_t j) {
                    Rng r = cr.derive(j);
                    PlantedSecret s = sample_secret(inst, r);
                    hit[j] = run_detector(grid.detector, inst, &s, r, grid.caps).decision ? 1 : 0;
                });
                std::size_t succ = 0;
                for (char h : hit) succ += h;
                PhaseCell pc;
                pc.n = n;
                pc.d = d;
                pc.lambda = lam;
                pc.m = inst.m;
                pc.detector = detector_name(grid.detector);
                pc.trials = grid.trials;
                pc.power = static_cast<double>(succ) / static_cast<double>(grid.trials);
                auto ci = wilson(succ, grid.trials);
                pc.ci_low = ci.low;
                pc.ci_high = ci.high;
                pc.seed = seed;
                out.push_back(pc);
            }
    return out;
}

namespace {

std::string g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

std::string phase_csv(const std::vector<PhaseCell> &cells) {
    std::ostringstream os;
    os << "n,d,lambda,m,detector,trials,power,ci_low,ci_high,seed\n";
    for (const auto &c : cells)
        os << c.n << ',' << c.d << ',' << g6(c.lambda) << ',' << c.m << ',' << c.detector << ',' << c.trials << ','
           << g6(c.power) << ',' << g6(c.ci_low) << ',' << g6(c.ci_high) << ',' << c.seed << '\n';
    return os.str();
}

std::optional<double> crossover(const std::vector<PhaseCell> &cells) {
    auto sorted = cells;
    std::stable_sort(sorted.begin(), sorted.end(),
                     [](const PhaseCell &a, const PhaseCell &b) { return a.lambda < b.lambda; });
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        const auto &a = sorted[i], &b = sorted[i + 1];
        if (a.power < 0.5 && b.power >= 0.5 && a.lambda > 0 && b.lambda > a.lambda) {
            const double f = (0.5 - a.power) / (b.power - a.power);
            return std::exp(std::log(a.lambda) + f * (std::log(b.lambda) - std::log(a.lambda)));
        }
    }
    return std::nullopt;
}

}  // namespace qld::biclique
