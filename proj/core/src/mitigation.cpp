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

#include "qld/mitigation.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "qld/haar.hpp"

namespace qld::mitigation {

void NoisyCircuitSpec::validate() const {
    if (n < 1) throw std::invalid_argument("noisy circuit: n must be >= 1");
    if (n > 10) throw ResourceError("noisy circuit: n above 10");
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("noisy circuit: kappa outside [0, 1]");
    const auto D = static_cast<Eigen::Index>(1) << n;
    for (const auto &u : blocks)
        if (u.rows() != D || u.cols() != D || !is_unitary(u, 1e-9))
            throw std::invalid_argument("noisy circuit: every block must be a unitary on n qubits");
    for (int b : noise_after)
        if (b < 0 || b >= static_cast<int>(blocks.size()))
            throw std::invalid_argument("noisy circuit: noise placement refers to a missing block");
}

bool NoisyCircuitSpec::noisy_after(int block) const {
    if (noise_after.empty()) return true;
    for (int b : noise_after)
        if (b == block) return true;
    return false;
}

Matrix NoisyCircuitSpec::composite() const {
    const auto D = static_cast<Eigen::Index>(1) << n;
    Matrix c = Matrix::Identity(D, D);
    for (const auto &u : blocks) c = u * c;
    return c;
}

NoisyCircuitSpec haar_circuit(int n, int l, double kappa, Rng &rng) {
    if (l < 0) throw std::invalid_argument("haar_circuit: l must be >= 0");
    NoisyCircuitSpec s;
    s.n = n;
    s.kappa = kappa;
    if (n > 10) throw ResourceError("haar_circuit: n above 10");
    for (int i = 0; i < l; ++i) s.blocks.push_back(haar::haar_unitary(std::size_t(1) << n, rng));
    s.validate();
    return s;
}

std::vector<Matrix> blocks_from_circuits(const std::vector<ens::CircuitSpec> &circuits) {
    std::vector<Matrix> out;
    for (const auto &c : circuits) out.push_back(ens::circuit_unitary(c));
    return out;
}

DensityOperator input_state(const NoisyCircuitSpec &spec) {
    spec.validate();
    const auto reg = QuditRegister::uniform(spec.n, 2);
    if (spec.input == InputKind::null_input) return DensityOperator::maximally_mixed(reg);
    Matrix c = spec.composite();
    Vector v = c.adjoint().col(0);
    return DensityOperator(reg, v * v.adjoint());
}

DensityOperator apply_noisy_circuit(const NoisyCircuitSpec &spec, const DensityOperator &input) {
    spec.validate();
    if (!(input.reg == QuditRegister::uniform(spec.n, 2)))
        throw std::invalid_argument("apply_noisy_circuit: input must live on n qubits");
    input.validate();
    DensityOperator rho = input;
    for (int b = 0; b < static_cast<int>(spec.blocks.size()); ++b) {
        rho = DensityOperator(rho.reg, spec.blocks[b] * rho.rho * spec.blocks[b].adjoint());
        rho.validate();
        if (spec.kappa > 0.0 && spec.noisy_after(b)) {
            const double before = rho.purity();
            rho = depolarize(rho, spec.kappa, DepolarizeScope::per_site);
            rho.validate();
            if (rho.purity() > before + 1e-12) throw std::domain_error("apply_noisy_circuit: noise layer raised purity");
        }
    }
    return rho;
}

double purity_constant(double kappa) { return (1.0 + 3.0 * (1.0 - kappa) * (1.0 - kappa)) / 4.0; }

namespace {

DensityOperator zero_state(int n) {
    const auto reg = QuditRegister::uniform(n, 2);
    return DensityOperator::from_pure(PureState::basis(reg, 0));
}

void check_params(int n, int l, double kappa, std::size_t trials) {
    if (n < 1 || l < 0) throw std::invalid_argument("mitigation: need n >= 1 and l >= 0");
    if (n > 10) throw ResourceError("mitigation: n above 10");
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("mitigation: kappa outside [0, 1]");
    if (trials < 2) throw std::invalid_argument("mitigation: need at least two trials");
}

}  // namespace

PurityCheck purity_decay_check(int n, int l, double kappa, std::size_t trials, const Rng &rng, int threads) {
    check_params(n, l, kappa, trials);
    std::vector<double> pur(trials);
    parallel_for(trials, threads, [&](std::size_t i) {
        Rng r = rng.derive(i);
        auto spec = haar_circuit(n, l, kappa, r);
        pur[i] = apply_noisy_circuit(spec, zero_state(n)).purity();
    });
    PurityCheck out;
    double s1 = 0.0, s2 = 0.0;
    for (double p : pur) {
        s1 += p;
        s2 += p * p;
    }
    const double N = static_cast<double>(trials);
    out.mean = s1 / N;
    out.stderr_ = std::sqrt(std::max(0.0, (s2 / N - out.mean * out.mean) * N / (N - 1)) / N);
    const double inv = std::ldexp(1.0, -n);
    out.bound = std::pow(purity_constant(kappa), static_cast<double>(n) * l) * (1.0 - inv) + inv;
    out.pass = out.mean <= out.bound + 3.0 * out.stderr_;
    return out;
}

double r_bound(int a, int n, int l, double kappa, double eps, double eps_star) {
    if (a < 0 || a > n || l < 0) throw std::invalid_argument("r_bound: need 0 <= a <= n and l >= 0");
    if (!(kappa >= 0.0 && kappa <= 1.0)) throw std::invalid_argument("r_bound: kappa outside [0, 1]");
    const double inv = std::ldexp(1.0, -n);
    return std::ldexp(1.0, a - n) *
               (std::pow(purity_constant(kappa), static_cast<double>(n) * l) * (1.0 - inv) + l * eps) +
           eps_star;
}

double haar_marginal_deviation(int n, int a, double purity) {
    if (a < 0 || a > n) throw std::invalid_argument("haar_marginal_deviation: need 0 <= a <= n");
    const double D = std::ldexp(1.0, n), dA = std::ldexp(1.0, a), dB = D / dA;
    if (D == 1.0) return 0.0;
    return (dA * D - dB) / (D * D - 1.0) * (purity - 1.0 / D);
}

ReducedStateAudit reduced_state_audit(int n, int l, double kappa, const std::vector<int> &A, std::size_t trials,
                                      const Rng &rng, int threads) {
    check_params(n, l, kappa, trials);
    if (l < 1) throw std::invalid_argument("reduced_state_audit: need at least one block");
    std::set<int> uniq(A.begin(), A.end());
    if (A.empty() || uniq.size() != A.size() || *uniq.begin() < 0 || *uniq.rbegin() >= n)
        throw std::invalid_argument("reduced_state_audit: A must be a nonempty set of distinct sites");
    const int a = static_cast<int>(A.size());
    const double dA = std::ldexp(1.0, a);
    const auto reg = QuditRegister::uniform(n, 2);
    const std::vector<int> keep(uniq.begin(), uniq.end());
    const auto eye = Matrix::Identity(static_cast<Eigen::Index>(dA), static_cast<Eigen::Index>(dA)) / dA;

    ReducedStateAudit out;
    out.distances.assign(trials, 0.0);
    std::vector<double> diff(trials, 0.0);
    parallel_for(trials, threads, [&](std::size_t i) {
        Rng r = rng.derive(i);
        auto spec = haar_circuit(n, l, kappa, r);
        auto head = spec;
        head.blocks.pop_back();
        head.noise_after.clear();
        DensityOperator rho = apply_noisy_circuit(head, zero_state(n));
        const double prev = rho.purity();
        const Matrix &u = spec.blocks.back();
        rho = DensityOperator(reg, u * rho.rho * u.adjoint());
        const Matrix ra = partial_trace(rho.rho, reg, keep);
        const double dev = ra.cwiseAbs2().sum() - 1.0 / dA;
        diff[i] = dev - haar_marginal_deviation(n, a, prev);
        if (kappa > 0.0) rho = depolarize(rho, kappa, DepolarizeScope::per_site);
        out.distances[i] = trace_norm_hermitian(partial_trace(rho.rho, reg, keep) - eye);
    });
    const double N = static_cast<double>(trials);
    out.R = r_bound(a, n, l, kappa);
    out.threshold = std::pow(2.0, a / 2.0) * std::pow(out.R, 0.25);
    std::size_t hits = 0;
    for (double x : out.distances) hits += x >= out.threshold ? 1 : 0;
    out.exceedance = static_cast<double>(hits) / N;
    out.stderr_ = std::sqrt(out.exceedance * (1.0 - out.exceedance) / N);
    out.predicted = std::sqrt(out.R);
    out.tail_pass = out.exceedance <= out.predicted + 3.0 * out.stderr_;

    double s1 = 0.0, s2 = 0.0;
    for (double x : diff) {
        s1 += x;
        s2 += x * x;
    }
    const double mean = s1 / N;
    out.recursion_stderr = std::sqrt(std::max(0.0, (s2 / N - mean * mean) * N / (N - 1)) / N);
    out.recursion_empirical = mean;
    out.recursion_exact = 0.0;
    out.recursion_pass = std::abs(mean) <= 3.0 * out.recursion_stderr + 1e-12;
    const double D = std::ldexp(1.0, n);
    out.recursion_le_bound = (dA * D - D / dA) / (D * D - 1.0) <= dA / D + 1e-15;
    out.pass = out.tail_pass && out.recursion_pass && out.recursion_le_bound;
    return out;
}

HypothesisTest hypothesis_test_sim(int n, int l, double kappa, const lowdeg::MeasurementPlan &plan, int k,
                                   std::size_t trials, const Rng &rng, const lowdeg::Options &opt) {
    check_params(n, l, kappa, 2);
    if (trials < 1) throw std::invalid_argument("hypothesis_test_sim: trials must be >= 1");
    plan.validate();
    if (!(plan.system == QuditRegister::uniform(n, 2)) || plan.ancilla != 0)
        throw std::invalid_argument("hypothesis_test_sim: plan must measure the n qubits without ancillas");
    std::vector<ens::WeightedState> support(trials);
    parallel_for(trials, opt.threads, [&](std::size_t i) {
        Rng r = rng.derive(i);
        auto spec = haar_circuit(n, l, kappa, r);
        spec.input = InputKind::alternative;
        support[i] = {1.0, apply_noisy_circuit(spec, input_state(spec))};
    });
    auto ensemble = ens::make_finite_ensemble("noisy-circuit", std::move(support));
    HypothesisTest out;
    out.report = lowdeg::degree_advantage(ensemble, plan, k, opt);
    out.normalized = out.report.table.empty() ? 0.0 : out.report.total / static_cast<double>(out.report.table.size());

    if (plan.locality != lowdeg::Locality::local) {
        out.budget = std::numeric_limits<double>::infinity();
    } else {
        // |c(alpha)| <= sum over touched copies of E||rho_T - I||_1, and each
        // term is at most 2^{a/2} R(a)^{1/4} + 2 R(a)^{1/2}.
        std::vector<double> delta(n + 1, 0.0);
        for (int a = 1; a <= n; ++a) {
            const double R = r_bound(a, n, l, kappa);
            delta[a] = std::min(2.0, std::pow(2.0, a / 2.0) * std::pow(R, 0.25) + 2.0 * std::sqrt(R));
        }
        for (const auto &e : out.report.table) {
            std::vector<int> per(plan.m, 0);
            for (const auto &p : e.index.positions) ++per[p.copy];
            double s = 0.0;
            for (int c : per) s += delta[c];
            s = std::min(2.0, s);
            out.budget += s * s;
        }
    }
    out.report.extras.emplace_back("normalized", out.normalized);
    out.report.extras.emplace_back("budget", out.budget);
    return out;
}

}  // namespace qld::mitigation
