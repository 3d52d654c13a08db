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

#include <cmath>

#include "lowdeg_internal.hpp"
#include "qld/haar.hpp"

namespace qld::lowdeg {

namespace {

using Hats = std::vector<std::vector<cplx>>;  // per copy, truncated transform
using PairFn = std::function<void(const Hats &, const Hats &, double, std::vector<double> &)>;

Hats truncate(const std::vector<std::vector<double>> &dists, int d, int N, const std::vector<int> &weight, int D) {
    Hats out;
    for (const auto &p : dists) {
        auto h = detail::copy_hat(p, d, N);
        for (std::size_t a = 0; a < h.size(); ++a)
            if (weight[a] == 0 || weight[a] > D) h[a] = 0.0;
        out.push_back(std::move(h));
    }
    return out;
}

double pair_g(const std::vector<cplx> &a, const std::vector<cplx> &b) {
    cplx s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
    return s.real();
}

// Averages fn over (rho, rho') pairs: every weighted pair of a finite support,
// otherwise `samples` independent pairs. Returns true for exact averaging.
bool for_pairs(const StateEnsemble &ens, const MeasurementPlan &plan, int D, const Options &opt, std::size_t width,
               std::vector<double> &acc, const PairFn &fn) {
    const int N = plan.sites_per_copy();
    const int d = plan.d();
    const auto weight = detail::digit_weights(d, N);
    acc.assign(width, 0.0);
    if (ens.finite()) {
        std::vector<Hats> hats;
        for (const auto &ws : ens.support)
            hats.push_back(truncate(detail::state_distributions(ws.state.rho, plan), d, N, weight, D));
        const std::size_t S = hats.size();
        std::vector<std::vector<double>> part(S, std::vector<double>(width, 0.0));
        parallel_for(S, opt.threads, [&](std::size_t a) {
            for (std::size_t b = 0; b < S; ++b)
                fn(hats[a], hats[b], ens.support[a].weight * ens.support[b].weight, part[a]);
        });
        for (const auto &p : part)
            for (std::size_t j = 0; j < width; ++j) acc[j] += p[j];
        return true;
    }
    if (opt.samples == 0) throw std::invalid_argument("pair averages need samples > 0 for this ensemble");
    const std::size_t chunks = std::min<std::size_t>(64, opt.samples);
    std::vector<std::vector<double>> part(chunks, std::vector<double>(width, 0.0));
    Rng root(opt.seed);
    const double w = 1.0 / static_cast<double>(opt.samples);
    parallel_for(chunks, opt.threads, [&](std::size_t c) {
        for (std::size_t s = opt.samples * c / chunks; s < opt.samples * (c + 1) / chunks; ++s) {
            Rng r1 = root.derive(2 * s), r2 = root.derive(2 * s + 1);
            Hats a = truncate(detail::sampled_distributions(ens, plan, r1), d, N, weight, D);
            Hats b = truncate(detail::sampled_distributions(ens, plan, r2), d, N, weight, D);
            fn(a, b, w, part[c]);
        }
    });
    for (const auto &p : part)
        for (std::size_t j = 0; j < width; ++j) acc[j] += p[j];
    return false;
}

// Elementary symmetric polynomials e_0..e_k of xs.
std::vector<double> elementary(const std::vector<double> &xs, int k) {
    std::vector<double> e(k + 1, 0.0);
    e[0] = 1.0;
    for (double x : xs)
        for (int t = k; t >= 1; --t) e[t] += e[t - 1] * x;
    return e;
}

}  // namespace

AdvantageReport copywise_advantage(const StateEnsemble &ens, const MeasurementPlan &plan, int D, int k,
                                   const Options &opt) {
    auto indices = enumerate_copywise_indices(plan, D, k, opt.budget);
    detail::CoefficientEngine engine(ens, plan, opt, std::min(k, plan.m));
    engine.prepare(indices);
    AdvantageReport r = detail::assemble(indices, engine, opt.threads);
    r.k = k;
    r.D = D;
    if (plan.ancilla != 0 || k == 0 || D == 0) return r;

    const int m = plan.m;
    const int kk = std::min(k, m);
    // Layout: [pair value, then |g_i|^t for copy i and t = 1..kk].
    const std::size_t width = 1 + static_cast<std::size_t>(m) * kk;
    std::vector<double> acc;
    bool exact = for_pairs(ens, plan, D, opt, width, acc, [&](const Hats &a, const Hats &b, double w,
                                                              std::vector<double> &out) {
        std::vector<double> g(m);
        for (int i = 0; i < m; ++i) g[i] = pair_g(a[i], b[i]);
        auto e = elementary(g, kk);
        double v = 0.0;
        for (int t = 1; t <= kk; ++t) v += e[t];
        out[0] += w * v;
        for (int i = 0; i < m; ++i) {
            double p = 1.0;
            for (int t = 1; t <= kk; ++t) {
                p *= std::abs(g[i]);
                out[1 + static_cast<std::size_t>(i) * kk + (t - 1)] += w * p;
            }
        }
    });
    double holder = 0.0;
    for (int t = 1; t <= kk; ++t) {
        std::vector<double> xs(m);
        for (int i = 0; i < m; ++i) xs[i] = std::pow(acc[1 + static_cast<std::size_t>(i) * kk + (t - 1)], 1.0 / t);
        holder += elementary(xs, t)[t];
    }
    r.extras.emplace_back("holder_bound", holder);
    r.extras.emplace_back("pair_value", acc[0]);
    r.extras.emplace_back("pair_exact", exact ? 1.0 : 0.0);
    return r;
}

double truncated_pair_moment(const StateEnsemble &ens, int ancilla, const Matrix &rotation, int D, int t,
                             bool absolute, const Options &opt) {
    MeasurementPlan plan = global_plan(ens.reg, 1, ancilla, {rotation}, "single");
    std::vector<double> acc;
    for_pairs(ens, plan, D, opt, 1, acc, [&](const Hats &a, const Hats &b, double w, std::vector<double> &out) {
        double g = pair_g(a[0], b[0]);
        out[0] += w * std::pow(absolute ? std::abs(g) : g, t);
    });
    return acc[0];
}

CopyMomentResult copy_moment_statistic(const StateEnsemble &ens, const Matrix &rotation, int k, const Options &opt,
                                       double epsilon, double C) {
    if (k < 1) throw std::invalid_argument("copy_moment_statistic: k must be >= 1");
    const std::size_t Dsys = ens.reg.total_dim();
    if (rotation.rows() != static_cast<Eigen::Index>(Dsys) || !is_unitary(rotation))
        throw std::invalid_argument("copy_moment_statistic: measurement must be a unitary on the system");
    CopyMomentResult r;
    r.epsilon = epsilon;
    const double kk = k;
    r.bound = C * kk * kk * std::pow(kk, kk) * (epsilon + 1.0 / static_cast<double>(Dsys));
    if (ens.haar) {
        r.value = haar::haar_copy_moment(static_cast<long>(Dsys), k).get_d();
        r.exact = true;
        return r;
    }
    const int N = ens.reg.num_sites();
    r.value = truncated_pair_moment(ens, 0, rotation, N, k, false, opt);
    r.exact = ens.finite();
    if (!r.exact) {
        r.samples = opt.samples;
        double m2 = truncated_pair_moment(ens, 0, rotation, N, 2 * k, false, opt);
        r.stderr_ = std::sqrt(std::max(0.0, m2 - r.value * r.value) / static_cast<double>(opt.samples));
    }
    return r;
}

}  // namespace qld::lowdeg
