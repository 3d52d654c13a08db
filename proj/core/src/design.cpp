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

#include <algorithm>
#include <cmath>
#include <limits>

#include "qld/ensembles.hpp"

namespace qld::ens {

namespace {

// Sorted multisets of size k over {0..D-1}, in lexicographic order.
std::vector<std::vector<int>> multisets(std::size_t D, int k) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(k, 0);
    if (k == 0) return {{}};
    while (true) {
        out.push_back(cur);
        int i = k - 1;
        while (i >= 0 && cur[i] == static_cast<int>(D) - 1) --i;
        if (i < 0) break;
        ++cur[i];
        for (int j = i + 1; j < k; ++j) cur[j] = cur[i];
    }
    return out;
}

double arrangements(const std::vector<int> &ms) {
    double num = std::tgamma(static_cast<double>(ms.size()) + 1.0);
    std::size_t i = 0;
    while (i < ms.size()) {
        std::size_t j = i;
        while (j < ms.size() && ms[j] == ms[i]) ++j;
        num /= std::tgamma(static_cast<double>(j - i) + 1.0);
        i = j;
    }
    return num;
}

std::size_t sym_dimension(std::size_t D, int k) {
    double s = binomial_double(static_cast<long>(D) + k - 1, k);
    if (s > 1e7) throw ResourceError("design_certify: symmetric subspace too large");
    return static_cast<std::size_t>(std::llround(s));
}

void fill_extremes(DesignReport &r, const Matrix &A) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.adjoint()), Eigen::EigenvaluesOnly);
    const RVector &mu = es.eigenvalues();
    const double S = static_cast<double>(r.sym_dim);
    const double mu_min = mu.minCoeff();
    const double mu_max = mu.maxCoeff();
    if (mu_min < -1e-10) r.non_psd_noise = true;
    // On the symmetric subspace the Haar moment is I/S, so the generalized
    // eigenvalues of (M_Haar, M) are 1 / (S mu_i).
    if (mu_min * S <= 1e-12) {
        r.singular = true;
        r.lambda_min = 1.0 / (S * mu_max);
        r.lambda_max = std::numeric_limits<double>::infinity();
        r.epsilon = std::numeric_limits<double>::infinity();
        return;
    }
    r.lambda_min = 1.0 / (S * mu_max);
    r.lambda_max = 1.0 / (S * mu_min);
    r.epsilon = std::max({0.0, 1.0 - r.lambda_min, r.lambda_max - 1.0});
    // Exact ensembles that match Haar land within rounding of zero.
    if (r.epsilon < 1e-12) r.epsilon = 0.0;
}

}  // namespace

Matrix symmetric_basis(std::size_t D, int k) {
    if (D < 1 || k < 0) throw std::invalid_argument("symmetric_basis: invalid arguments");
    std::size_t rows = 1;
    for (int i = 0; i < k; ++i) {
        rows *= D;
        check_dimension(rows, "symmetric_basis");
    }
    auto ms = multisets(D, k);
    Matrix B = Matrix::Zero(rows, ms.size());
    for (std::size_t c = 0; c < ms.size(); ++c) {
        std::vector<int> arr = ms[c];
        const double norm = 1.0 / std::sqrt(arrangements(arr));
        do {
            std::size_t idx = 0;
            for (int v : arr) idx = idx * D + v;
            B(idx, c) = norm;
        } while (std::next_permutation(arr.begin(), arr.end()));
    }
    return B;
}

DesignReport design_certify(const StateEnsemble &ens, int k, DesignMode mode, std::size_t samples, Rng &rng,
                            int threads) {
    if (k < 1) throw std::invalid_argument("design_certify: k must be >= 1");
    const std::size_t D = ens.reg.total_dim();
    DesignReport r;
    r.ensemble = ens.name;
    r.k = k;
    r.sym_dim = sym_dimension(D, k);

    if (mode == DesignMode::exact) {
        if (!ens.has_exact_moment(k))
            throw std::invalid_argument("design_certify: ensemble '" + ens.name + "' has no exact moment of order " +
                                        std::to_string(k));
        Matrix B = symmetric_basis(D, k);
        Matrix A = B.adjoint() * ens.moment(k) * B;
        r.exact = true;
        fill_extremes(r, A);
        return r;
    }

    if (samples == 0) throw std::invalid_argument("design_certify: Monte Carlo mode needs samples > 0");
    check_dimension(r.sym_dim, "design_certify");
    const auto ms = multisets(D, k);
    const auto S = static_cast<Eigen::Index>(ms.size());
    std::vector<double> weight(ms.size());
    for (std::size_t c = 0; c < ms.size(); ++c) weight[c] = std::sqrt(arrangements(ms[c]));

    // Fixed chunking: the reduction order never depends on the worker count.
    const std::size_t chunks = std::min<std::size_t>(64, samples);
    const std::size_t batches = std::min<std::size_t>(10, chunks);
    std::vector<Matrix> partial(chunks);
    Matrix B;
    if (!ens.pure_sampler) B = symmetric_basis(D, k);
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::size_t lo = samples * c / chunks;
        const std::size_t hi = samples * (c + 1) / chunks;
        Matrix acc = Matrix::Zero(S, S);
        constexpr std::size_t block = 256;
        Matrix coords(S, static_cast<Eigen::Index>(block));
        std::size_t filled = 0;
        auto flush = [&]() {
            if (filled == 0) return;
            auto cols = coords.leftCols(static_cast<Eigen::Index>(filled));
            acc.noalias() += cols * cols.adjoint();
            filled = 0;
        };
        for (std::size_t i = lo; i < hi; ++i) {
            Rng rr = rng.derive(i);
            if (ens.pure_sampler) {
                Vector psi = ens.pure_sampler(rr);
                for (Eigen::Index a = 0; a < S; ++a) {
                    cplx p = weight[a];
                    for (int v : ms[a]) p *= psi(v);
                    coords(a, static_cast<Eigen::Index>(filled)) = p;
                }
                if (++filled == block) flush();
            } else {
                DensityOperator rho = ens.sample(rr);
                Matrix t = Matrix::Identity(1, 1);
                for (int j = 0; j < k; ++j) t = kron(t, rho.rho);
                acc += B.adjoint() * t * B;
            }
        }
        flush();
        partial[c] = std::move(acc);
    });

    Matrix A = Matrix::Zero(S, S);
    std::vector<Matrix> batch(batches, Matrix::Zero(S, S));
    std::vector<std::size_t> batch_count(batches, 0);
    for (std::size_t c = 0; c < chunks; ++c) {
        A += partial[c];
        batch[c % batches] += partial[c];
        batch_count[c % batches] += samples * (c + 1) / chunks - samples * c / chunks;
    }
    A /= static_cast<double>(samples);
    r.samples = samples;
    fill_extremes(r, A);
    if (batches > 1) {
        std::vector<double> eps;
        for (std::size_t b = 0; b < batches; ++b) {
            DesignReport tmp;
            tmp.sym_dim = r.sym_dim;
            fill_extremes(tmp, batch[b] / static_cast<double>(batch_count[b]));
            eps.push_back(tmp.epsilon);
        }
        double mean = 0.0;
        for (double e : eps) mean += e;
        mean /= static_cast<double>(eps.size());
        double var = 0.0;
        for (double e : eps) var += (e - mean) * (e - mean);
        var /= static_cast<double>(eps.size() - 1);
        r.sampling_error = std::isfinite(var) ? std::sqrt(var / static_cast<double>(eps.size())) : std::numeric_limits<double>::infinity();
    }
    return r;
}

}  // namespace qld::ens
