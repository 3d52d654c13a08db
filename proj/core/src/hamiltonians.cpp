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

#include "qld/ensembles.hpp"

namespace qld::ens {

namespace {

// Action of a Pauli string on |x>: P|x> = phase(x) |x ^ flip>.
struct PauliAction {
    std::size_t flip = 0;
    std::size_t zmask = 0;
    int y_count = 0;  // each Y contributes a factor i
};

PauliAction pauli_action(const std::string &pauli) {
    PauliAction a;
    const int n = static_cast<int>(pauli.size());
    for (int q = 0; q < n; ++q) {
        std::size_t bit = std::size_t(1) << (n - 1 - q);
        switch (pauli[q]) {
            case 'I': break;
            case 'X': a.flip |= bit; break;
            case 'Y':
                a.flip |= bit;
                a.zmask |= bit;
                ++a.y_count;
                break;
            case 'Z': a.zmask |= bit; break;
            default: throw std::invalid_argument("pauli string: unexpected character '" + std::string(1, pauli[q]) + "'");
        }
    }
    return a;
}

void add_pauli(Matrix &h, const std::string &pauli, double coef) {
    PauliAction a = pauli_action(pauli);
    const cplx ipow[4] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};
    const cplx base = coef * ipow[a.y_count % 4];
    for (Eigen::Index x = 0; x < h.cols(); ++x) {
        // Y = iXZ: Z acts first on |x>, giving (-1)^{x.zmask}.
        int parity = __builtin_popcountll(static_cast<std::size_t>(x) & a.zmask) & 1;
        h(static_cast<Eigen::Index>(static_cast<std::size_t>(x) ^ a.flip), x) += parity ? -base : base;
    }
}

}  // namespace

Matrix pauli_string_matrix(const std::string &pauli) {
    const std::size_t dim = std::size_t(1) << pauli.size();
    check_dimension(dim, "pauli_string_matrix");
    Matrix m = Matrix::Zero(dim, dim);
    add_pauli(m, pauli, 1.0);
    return m;
}

HamiltonianSpec sample_gue(int n, Rng &rng) {
    if (n < 1) throw std::invalid_argument("sample_gue: n must be >= 1");
    const std::size_t dim = std::size_t(1) << n;
    check_dimension(dim, "sample_gue");
    const double d = static_cast<double>(dim);
    Matrix h(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) {
        h(i, i) = rng.normal() / std::sqrt(d);
        for (std::size_t j = i + 1; j < dim; ++j) {
            double re = rng.normal();
            double im = rng.normal();
            cplx z = cplx(re, im) / std::sqrt(2.0 * d);
            h(i, j) = z;
            h(j, i) = std::conj(z);
        }
    }
    HamiltonianSpec s;
    s.kind = HamiltonianKind::gue;
    s.n = n;
    s.matrix = std::move(h);
    return s;
}

HamiltonianSpec sample_rsps(int n, int J, Rng &rng) {
    if (n < 1 || J < 1) throw std::invalid_argument("sample_rsps: n and J must be >= 1");
    const std::size_t dim = std::size_t(1) << n;
    check_dimension(dim, "sample_rsps");
    HamiltonianSpec s;
    s.kind = HamiltonianKind::rsps;
    s.n = n;
    s.J = J;
    s.matrix = Matrix::Zero(dim, dim);
    const double coef = 1.0 / std::sqrt(static_cast<double>(J));
    static const char letters[4] = {'I', 'X', 'Y', 'Z'};
    for (int a = 0; a < J; ++a) {
        std::string p(n, 'I');
        for (int q = 0; q < n; ++q) p[q] = letters[rng.below(4)];
        int sign = rng.bernoulli(0.5) ? 1 : -1;
        add_pauli(s.matrix, p, sign * coef);
        s.paulis.push_back(std::move(p));
        s.signs.push_back(sign);
    }
    return s;
}

double operator_norm(const Matrix &hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian, Eigen::EigenvaluesOnly);
    const auto &ev = es.eigenvalues();
    return std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
}

DensityOperator gibbs_state(const QuditRegister &reg, const Matrix &h, double beta) {
    if (!std::isfinite(beta)) throw std::invalid_argument("gibbs_state: beta must be finite");
    if (h.rows() != static_cast<Eigen::Index>(reg.total_dim()) || h.cols() != h.rows())
        throw std::invalid_argument("gibbs_state: Hamiltonian size does not match the register");
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const RVector &ev = es.eigenvalues();
    // Shift by the extreme eigenvalue so the largest weight is exactly 1.
    const double shift = beta >= 0 ? ev.minCoeff() : ev.maxCoeff();
    RVector w(ev.size());
    for (Eigen::Index i = 0; i < ev.size(); ++i) w(i) = std::exp(-beta * (ev(i) - shift));
    w /= w.sum();
    const Matrix &v = es.eigenvectors();
    Matrix rho = v * w.cast<cplx>().asDiagonal() * v.adjoint();
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return DensityOperator(reg, rho);
}

DensityOperator gibbs_state(const HamiltonianSpec &h, double beta) {
    return gibbs_state(QuditRegister::uniform(h.n, 2), h.matrix, beta);
}

StateEnsemble make_gibbs_ensemble(HamiltonianKind kind, int n, double beta, int J) {
    if (n < 1) throw std::invalid_argument("gibbs ensemble: n must be >= 1");
    check_dimension(std::size_t(1) << n, "gibbs ensemble");
    if (kind == HamiltonianKind::rsps && J < 1) throw std::invalid_argument("gibbs-rsps ensemble: J must be >= 1");
    StateEnsemble e;
    e.name = kind == HamiltonianKind::gue ? "gibbs-gue" : "gibbs-rsps";
    e.reg = QuditRegister::uniform(n, 2);
    e.sampler = [kind, n, beta, J](Rng &rng) {
        HamiltonianSpec h = kind == HamiltonianKind::gue ? sample_gue(n, rng) : sample_rsps(n, J, rng);
        return gibbs_state(h, beta);
    };
    e.parameters = {{"n", static_cast<double>(n)}, {"beta", beta}};
    if (kind == HamiltonianKind::rsps) e.parameters.emplace_back("J", static_cast<double>(J));
    return e;
}

}  // namespace qld::ens
