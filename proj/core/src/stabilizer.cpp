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
#include <map>
#include <queue>

#include "qld/ensembles.hpp"
#include "qld/haar.hpp"

namespace qld::ens {

Integer stabilizer_count(int n) {
    Integer c = 1;
    c <<= n;
    for (int k = 1; k <= n; ++k) c *= (Integer(1) << k) + 1;
    return c;
}

namespace {

std::vector<long long> phase_key(Vector &v) {
    Eigen::Index first = 0;
    while (first < v.size() && std::abs(v(first)) < 1e-9) ++first;
    cplx ph = v(first) / std::abs(v(first));
    v *= std::conj(ph);
    std::vector<long long> key;
    key.reserve(2 * v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        key.push_back(std::llround(v(i).real() * 1e6));
        key.push_back(std::llround(v(i).imag() * 1e6));
    }
    return key;
}

}  // namespace

std::vector<Vector> stabilizer_orbit(int n) {
    if (n < 1 || n > 3) throw ResourceError("stabilizer_orbit: explicit orbit generation supports n <= 3");
    QuditRegister reg = QuditRegister::uniform(n, 2);
    const double r = 1.0 / std::sqrt(2.0);
    Matrix h(2, 2), s(2, 2), cx = Matrix::Zero(4, 4);
    h << r, r, r, -r;
    s << 1, 0, 0, cplx(0, 1);
    cx(0, 0) = cx(1, 1) = cx(2, 3) = cx(3, 2) = 1.0;
    struct Op {
        Matrix g;
        std::vector<int> sites;
    };
    std::vector<Op> ops;
    for (int q = 0; q < n; ++q) {
        ops.push_back({h, {q}});
        ops.push_back({s, {q}});
    }
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            if (a != b) ops.push_back({cx, {a, b}});

    std::map<std::vector<long long>, std::size_t> seen;
    std::vector<Vector> states;
    Vector start = Vector::Zero(reg.total_dim());
    start(0) = 1.0;
    seen[phase_key(start)] = 0;
    states.push_back(start);
    std::queue<std::size_t> todo;
    todo.push(0);
    while (!todo.empty()) {
        std::size_t cur = todo.front();
        todo.pop();
        for (const auto &op : ops) {
            Vector v = states[cur];
            apply_gate(v, reg, op.g, op.sites);
            auto key = phase_key(v);
            if (seen.emplace(key, states.size()).second) {
                states.push_back(v);
                todo.push(states.size() - 1);
            }
        }
    }
    return states;
}

Vector sample_stabilizer_state(int n, Rng &rng) {
    if (n < 1 || n > 8) throw ResourceError("sample_stabilizer_state: n must be in [1, 8]");
    // Number of states whose support is an affine subspace of dimension k:
    // [n choose k]_2 * 2^(n-k) cosets * 2^(k(k-1)/2) quadratic forms * 4^k linear phases.
    std::vector<Integer> weight(n + 1);
    Integer total = 0;
    for (int k = 0; k <= n; ++k) {
        Integer num = 1, den = 1;
        for (int i = 0; i < k; ++i) {
            num *= (Integer(1) << (n - i)) - 1;
            den *= (Integer(1) << (k - i)) - 1;
        }
        Integer w = num / den;
        w <<= (n - k) + k * (k - 1) / 2 + 2 * k;
        weight[k] = w;
        total += w;
    }
    // Pick k with probability proportional to weight[k]; totals fit in 64 bits for n <= 8.
    std::uint64_t u = rng.below(total.get_ui());
    int k = 0;
    Integer acc = 0;
    for (; k <= n; ++k) {
        acc += weight[k];
        if (Integer(u) < acc) break;
    }
    // Uniform k-dimensional subspace via a random full-rank k x n matrix.
    std::vector<std::uint32_t> basis;
    while (true) {
        basis.clear();
        for (int i = 0; i < k; ++i) basis.push_back(static_cast<std::uint32_t>(rng.below(1ULL << n)));
        std::vector<std::uint32_t> red = basis;
        int rank = 0;
        for (int bit = n - 1; bit >= 0 && rank < k; --bit) {
            int piv = -1;
            for (int i = rank; i < k; ++i)
                if (red[i] >> bit & 1u) {
                    piv = i;
                    break;
                }
            if (piv < 0) continue;
            std::swap(red[rank], red[piv]);
            for (int i = 0; i < k; ++i)
                if (i != rank && (red[i] >> bit & 1u)) red[i] ^= red[rank];
            ++rank;
        }
        if (rank == k) break;
    }
    std::uint32_t shift = static_cast<std::uint32_t>(rng.below(1ULL << n));
    std::vector<int> lin(k);
    for (auto &l : lin) l = static_cast<int>(rng.below(4));
    std::vector<std::vector<int>> quad(k, std::vector<int>(k, 0));
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) quad[i][j] = static_cast<int>(rng.below(2));

    const cplx ipow[4] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};
    Vector v = Vector::Zero(std::size_t(1) << n);
    const double amp = std::pow(2.0, -0.5 * k);
    for (std::uint32_t w = 0; w < (1u << k); ++w) {
        std::uint32_t x = shift;
        int phase = 0;
        for (int i = 0; i < k; ++i) {
            if (!(w >> i & 1u)) continue;
            x ^= basis[i];
            phase += lin[i];
            for (int j = i + 1; j < k; ++j)
                if ((w >> j & 1u) && quad[i][j]) phase += 2;
        }
        v(x) = amp * ipow[phase % 4];
    }
    return v;
}

StateEnsemble make_stabilizer_ensemble(int n) {
    if (n < 1 || n > 6) throw ResourceError("make_stabilizer_ensemble: n must be in [1, 6]");
    QuditRegister reg = QuditRegister::uniform(n, 2);
    StateEnsemble e;
    if (n <= 2) {
        std::vector<WeightedState> support;
        for (const auto &v : stabilizer_orbit(n)) support.push_back({1.0, DensityOperator(reg, v * v.adjoint())});
        e = make_finite_ensemble("stabilizer", std::move(support));
        std::vector<Vector> orbit = stabilizer_orbit(n);
        e.pure_sampler = [orbit](Rng &rng) { return orbit[rng.below(orbit.size())]; };
        e.sampler = [orbit, reg](Rng &rng) {
            const Vector &v = orbit[rng.below(orbit.size())];
            return DensityOperator(reg, v * v.adjoint());
        };
    } else {
        e.name = "stabilizer";
        e.reg = reg;
        e.pure_sampler = [n](Rng &rng) { return sample_stabilizer_state(n, rng); };
        e.sampler = [n, reg](Rng &rng) {
            Vector v = sample_stabilizer_state(n, rng);
            return DensityOperator(reg, v * v.adjoint());
        };
        const int dim = 1 << n;
        // Stabilizer states form a 3-design, so moments up to order 3 are Haar moments.
        e.exact_moment = [dim](int k) { return haar::moment_operator(dim, k).matrix; };
        e.exact_moment_max = 3;
    }
    e.parameters = {{"n", static_cast<double>(n)}};
    return e;
}

}  // namespace qld::ens
