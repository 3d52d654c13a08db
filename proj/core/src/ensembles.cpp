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

#include "qld/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "qld/haar.hpp"

namespace qld::ens {

Matrix StateEnsemble::moment(int k) const {
    if (k < 0) throw std::invalid_argument("moment: negative order");
    std::size_t dim = 1;
    for (int i = 0; i < k; ++i) {
        dim *= reg.total_dim();
        check_dimension(dim, "ensemble moment");
    }
    if (finite()) {
        const auto n = static_cast<Eigen::Index>(dim);
        Matrix acc = Matrix::Zero(n, n);
        for (const auto &ws : support) {
            Matrix p = Matrix::Identity(1, 1);
            for (int i = 0; i < k; ++i) p = kron(p, ws.state.rho);
            acc += ws.weight * p;
        }
        return acc;
    }
    if (exact_moment && k <= exact_moment_max) return exact_moment(k);
    throw std::invalid_argument("moment: ensemble '" + name + "' has no exact moment of order " + std::to_string(k));
}

StateEnsemble make_haar_ensemble(const QuditRegister &reg) {
    check_dimension(reg.total_dim(), "haar ensemble");
    StateEnsemble e;
    e.name = "haar";
    e.reg = reg;
    const std::size_t dim = reg.total_dim();
    e.pure_sampler = [dim](Rng &rng) { return haar::haar_vector(dim, rng); };
    e.sampler = [reg, dim](Rng &rng) {
        Vector v = haar::haar_vector(dim, rng);
        return DensityOperator(reg, v * v.adjoint());
    };
    e.exact_moment = [dim](int k) { return haar::moment_operator(static_cast<int>(dim), k).matrix; };
    e.exact_moment_max = 12;
    e.haar = true;
    e.parameters = {{"d", static_cast<double>(dim)}, {"sites", static_cast<double>(reg.num_sites())}};
    return e;
}

StateEnsemble make_haar_ensemble(int d) { return make_haar_ensemble(QuditRegister::uniform(1, d)); }

StateEnsemble make_finite_ensemble(std::string name, std::vector<WeightedState> support) {
    if (support.empty()) throw std::invalid_argument("make_finite_ensemble: empty support");
    double total = 0.0;
    for (const auto &ws : support) {
        if (ws.weight < 0.0) throw std::invalid_argument("make_finite_ensemble: negative weight");
        if (!(ws.state.reg == support[0].state.reg))
            throw std::invalid_argument("make_finite_ensemble: register mismatch");
        total += ws.weight;
    }
    for (auto &ws : support) ws.weight /= total;
    StateEnsemble e;
    e.name = std::move(name);
    e.reg = support[0].state.reg;
    std::vector<double> cdf;
    double acc = 0.0;
    for (const auto &ws : support) cdf.push_back(acc += ws.weight);
    e.support = support;
    e.sampler = [support, cdf](Rng &rng) {
        double u = rng.uniform();
        std::size_t i = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        return support[std::min(i, support.size() - 1)].state;
    };
    return e;
}

StateEnsemble make_point_ensemble(std::string name, const DensityOperator &state) {
    return make_finite_ensemble(std::move(name), {{1.0, state}});
}

Matrix rotated_reduced_state(const Matrix &rho, const QuditRegister &reg, int ancilla,
                             const std::vector<Matrix> &rotations, const std::vector<Position> &T) {
    const int d = reg.uniform_dim();
    const int n = reg.num_sites();
    QuditRegister full = QuditRegister::uniform(n + ancilla, d);
    std::vector<Position> sorted = T;
    std::sort(sorted.begin(), sorted.end());
    Matrix out = Matrix::Identity(1, 1);
    std::size_t i = 0;
    while (i < sorted.size()) {
        const int copy = sorted[i].copy;
        std::vector<int> keep;
        for (; i < sorted.size() && sorted[i].copy == copy; ++i) {
            if (sorted[i].site < 0 || sorted[i].site >= n + ancilla)
                throw std::invalid_argument("rotated_reduced_state: site outside the register");
            keep.push_back(sorted[i].site);
        }
        Matrix state = rho;
        if (ancilla > 0) {
            std::size_t ad = 1;
            for (int a = 0; a < ancilla; ++a) ad *= d;
            Matrix zero = Matrix::Zero(ad, ad);
            zero(0, 0) = 1.0;
            state = kron(rho, zero);
        }
        if (copy < static_cast<int>(rotations.size()) && rotations[copy].size() > 0) {
            const Matrix &u = rotations[copy];
            if (u.rows() != state.rows()) throw std::invalid_argument("rotated_reduced_state: rotation size mismatch");
            state = u * state * u.adjoint();
        }
        out = kron(out, partial_trace(state, full, keep));
    }
    return out;
}

Matrix rotated_reduced_average(const StateEnsemble &ens, int ancilla, const std::vector<Matrix> &rotations,
                               const std::vector<Position> &T) {
    if (ens.finite()) {
        Matrix acc;
        for (const auto &ws : ens.support) {
            Matrix r = ws.weight * rotated_reduced_state(ws.state.rho, ens.reg, ancilla, rotations, T);
            if (acc.size() == 0)
                acc = r;
            else
                acc += r;
        }
        return acc;
    }
    std::vector<Position> sorted = T;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> copies;
    for (const auto &p : sorted)
        if (copies.empty() || copies.back() != p.copy) copies.push_back(p.copy);
    const int c = static_cast<int>(copies.size());
    if (!ens.has_exact_moment(c))
        throw std::invalid_argument("rotated_reduced_average: ensemble lacks an exact moment of order " +
                                    std::to_string(c));
    const int d = ens.reg.uniform_dim();
    const int n = ens.reg.num_sites();
    const int N = n + ancilla;
    const std::size_t D = ens.reg.total_dim();
    std::size_t ad = 1;
    for (int a = 0; a < ancilla; ++a) ad *= d;
    std::size_t big = 1;
    for (int j = 0; j < c; ++j) {
        big *= D * ad;
        check_dimension(big, "rotated_reduced_average");
    }
    Matrix M = ens.moment(c);
    Matrix V = Matrix::Identity(1, 1);
    for (int copy : copies) {
        Matrix embed = Matrix::Zero(D * ad, D);
        for (std::size_t x = 0; x < D; ++x) embed(x * ad, x) = 1.0;
        if (copy < static_cast<int>(rotations.size()) && rotations[copy].size() > 0) embed = rotations[copy] * embed;
        V = kron(V, embed);
    }
    Matrix R = V * M * V.adjoint();
    std::vector<int> keep;
    for (const auto &p : sorted) {
        int j = static_cast<int>(std::find(copies.begin(), copies.end(), p.copy) - copies.begin());
        keep.push_back(j * N + p.site);
    }
    return partial_trace(R, QuditRegister::uniform(c * N, d), keep);
}

IndistinguishabilityEstimate local_indistinguishability(const StateEnsemble &ens, int m,
                                                        const std::vector<Position> &T,
                                                        const std::vector<Matrix> &rotations, int ancilla,
                                                        std::size_t samples, Rng &rng, bool prefer_exact) {
    const int N = ens.reg.num_sites() + ancilla;
    std::set<Position> seen;
    for (const auto &p : T) {
        if (p.copy < 0 || p.copy >= m || p.site < 0 || p.site >= N)
            throw std::invalid_argument("local_indistinguishability: position outside the plan");
        if (!seen.insert(p).second) throw std::invalid_argument("local_indistinguishability: repeated position");
    }
    std::size_t tdim = 1;
    for (std::size_t i = 0; i < T.size(); ++i) tdim *= ens.reg.uniform_dim();
    check_dimension(tdim, "local_indistinguishability");

    const Matrix mixed = Matrix::Identity(ens.reg.total_dim(), ens.reg.total_dim()) /
                         static_cast<double>(ens.reg.total_dim());
    Matrix null = rotated_reduced_state(mixed, ens.reg, ancilla, rotations, T);
    IndistinguishabilityEstimate out;

    std::set<int> copies;
    for (const auto &p : T) copies.insert(p.copy);
    bool exact_ok = prefer_exact && ens.has_exact_moment(static_cast<int>(copies.size()));
    if (exact_ok) {
        try {
            Matrix avg = rotated_reduced_average(ens, ancilla, rotations, T);
            out.estimate = 0.5 * trace_norm_hermitian(avg - null);
            out.exact = true;
            return out;
        } catch (const ResourceError &) {
            if (samples == 0) throw;
        }
    }
    if (samples == 0) throw std::invalid_argument("local_indistinguishability: no exact moment and zero samples");
    const std::size_t batches = std::min<std::size_t>(10, samples);
    std::vector<Matrix> batch_sum(batches);
    for (std::size_t i = 0; i < samples; ++i) {
        Rng r = rng.derive(i);
        DensityOperator rho = ens.sample(r);
        Matrix red = rotated_reduced_state(rho.rho, ens.reg, ancilla, rotations, T);
        auto &b = batch_sum[i % batches];
        if (b.size() == 0)
            b = red;
        else
            b += red;
    }
    Matrix total = Matrix::Zero(null.rows(), null.cols());
    std::vector<std::size_t> counts(batches, 0);
    for (std::size_t i = 0; i < samples; ++i) ++counts[i % batches];
    std::vector<double> est;
    for (std::size_t b = 0; b < batches; ++b) {
        total += batch_sum[b];
        est.push_back(0.5 * trace_norm_hermitian(batch_sum[b] / static_cast<double>(counts[b]) - null));
    }
    total /= static_cast<double>(samples);
    out.estimate = 0.5 * trace_norm_hermitian(total - null);
    if (batches > 1) {
        double mean = 0.0;
        for (double v : est) mean += v;
        mean /= batches;
        double var = 0.0;
        for (double v : est) var += (v - mean) * (v - mean);
        var /= (batches - 1);
        out.stderr_ = std::sqrt(var / batches);
    }
    out.samples = samples;
    return out;
}

}  // namespace qld::ens
