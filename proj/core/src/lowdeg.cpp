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

#include "qld/lowdeg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lowdeg_internal.hpp"
#include "qld/haar.hpp"

namespace qld::lowdeg {

std::size_t MeasurementPlan::outcome_dim() const {
    std::size_t D = system.total_dim();
    for (int a = 0; a < ancilla; ++a) D *= d();
    return D;
}

Matrix MeasurementPlan::rotation(int copy) const {
    if (copy < 0 || copy >= m) throw std::invalid_argument("plan: copy index out of range");
    if (copy < static_cast<int>(rotations.size()) && rotations[copy].size() > 0) return rotations[copy];
    const auto D = static_cast<Eigen::Index>(outcome_dim());
    return Matrix::Identity(D, D);
}

void MeasurementPlan::validate() const {
    if (m < 1) throw std::invalid_argument("plan: m must be >= 1");
    if (system.num_sites() < 1) throw std::invalid_argument("plan: empty system register");
    if (ancilla < 0) throw std::invalid_argument("plan: negative ancilla count");
    (void)d();
    check_dimension(outcome_dim(), "measurement plan");
    if (rotations.size() > static_cast<std::size_t>(m)) throw std::invalid_argument("plan: more rotations than copies");
    for (const auto &u : rotations) {
        if (u.size() == 0) continue;
        if (u.rows() != static_cast<Eigen::Index>(outcome_dim()) || !is_unitary(u))
            throw std::invalid_argument("plan: rotation is not a unitary of the outcome dimension");
    }
}

MeasurementPlan computational_plan(const QuditRegister &system, int m) {
    MeasurementPlan p;
    p.m = m;
    p.system = system;
    p.locality = Locality::local;
    p.label = "comp-basis";
    p.validate();
    return p;
}

MeasurementPlan product_plan(const QuditRegister &system, const std::vector<std::vector<Matrix>> &local,
                             std::string label) {
    MeasurementPlan p;
    p.m = static_cast<int>(local.size());
    p.system = system;
    p.locality = Locality::local;
    p.label = std::move(label);
    for (const auto &copy : local) {
        if (static_cast<int>(copy.size()) != system.num_sites())
            throw std::invalid_argument("product_plan: one local unitary per site required");
        Matrix u = Matrix::Identity(1, 1);
        for (const auto &g : copy) u = kron(u, g);
        p.rotations.push_back(u);
    }
    p.validate();
    return p;
}

MeasurementPlan random_local_plan(const QuditRegister &system, int m, Rng &rng) {
    std::vector<std::vector<Matrix>> local(m);
    for (int i = 0; i < m; ++i)
        for (int q = 0; q < system.num_sites(); ++q) local[i].push_back(haar::haar_unitary(system.dim(q), rng));
    return product_plan(system, local, "random-local");
}

MeasurementPlan global_plan(const QuditRegister &system, int m, int ancilla, const std::vector<Matrix> &rotations,
                            std::string label) {
    MeasurementPlan p;
    p.m = m;
    p.system = system;
    p.ancilla = ancilla;
    p.rotations = rotations;
    p.label = std::move(label);
    p.validate();
    return p;
}

std::vector<double> copy_distribution(const Matrix &rho, int ancilla, const Matrix &rotation) {
    if (ancilla == 0) return born_probabilities(rho, rotation);
    const Eigen::Index ad = rotation.rows() / rho.rows();
    Matrix zero = Matrix::Zero(ad, ad);
    zero(0, 0) = 1.0;
    return born_probabilities(kron(rho, zero), rotation);
}

std::vector<double> copy_distribution(const Vector &psi, int ancilla, const Matrix &rotation, int d) {
    std::size_t ad = 1;
    for (int a = 0; a < ancilla; ++a) ad *= d;
    Vector full = Vector::Zero(rotation.rows());
    if (static_cast<std::size_t>(full.size()) != psi.size() * ad)
        throw std::invalid_argument("copy_distribution: rotation does not match the state");
    for (Eigen::Index x = 0; x < psi.size(); ++x) full(x * ad) = psi(x);
    Vector amp = rotation.adjoint() * full;
    std::vector<double> p(amp.size());
    double total = 0.0;
    for (Eigen::Index x = 0; x < amp.size(); ++x) total += p[x] = std::norm(amp(x));
    for (auto &v : p) v /= total;
    return p;
}

int FourierIndex::copies() const {
    int c = 0;
    for (std::size_t i = 0; i < positions.size(); ++i)
        if (i == 0 || positions[i].copy != positions[i - 1].copy) ++c;
    return c;
}

std::vector<cplx> digit_transform(const std::vector<cplx> &f, int d, int digits) {
    std::vector<cplx> a = f;
    std::size_t total = 1;
    for (int i = 0; i < digits; ++i) total *= d;
    if (a.size() != total) throw std::invalid_argument("digit_transform: size is not d^digits");
    if (d == 2) {
        for (std::size_t h = 1; h < total; h <<= 1)
            for (std::size_t i = 0; i < total; i += 2 * h)
                for (std::size_t j = i; j < i + h; ++j) {
                    cplx x = a[j], y = a[j + h];
                    a[j] = x + y;
                    a[j + h] = x - y;
                }
        return a;
    }
    std::vector<cplx> w(d * d);
    for (int x = 0; x < d; ++x)
        for (int al = 0; al < d; ++al) {
            int e = (al * x) % d;
            double ang = -2.0 * std::numbers::pi * e / d;
            w[al * d + x] = cplx(std::cos(ang), std::sin(ang));
        }
    std::vector<cplx> tmp(d);
    for (std::size_t stride = 1; stride < total; stride *= d) {
        for (std::size_t base = 0; base < total; ++base) {
            if ((base / stride) % d != 0) continue;
            for (int al = 0; al < d; ++al) {
                cplx s = 0.0;
                for (int x = 0; x < d; ++x) s += w[al * d + x] * a[base + x * stride];
                tmp[al] = s;
            }
            for (int al = 0; al < d; ++al) a[base + al * stride] = tmp[al];
        }
    }
    return a;
}

double AdvantageReport::extra(const std::string &key) const {
    for (const auto &[k, v] : extras)
        if (k == key) return v;
    throw std::out_of_range("AdvantageReport: no extra named " + key);
}

bool AdvantageReport::has_extra(const std::string &key) const {
    for (const auto &kv : extras)
        if (kv.first == key) return true;
    return false;
}

std::string method_name(Method m) {
    switch (m) {
        case Method::automatic: return "automatic";
        case Method::enumeration: return "exact-enumeration";
        case Method::moment: return "exact-moment";
        case Method::monte_carlo: return "monte-carlo";
    }
    return "unknown";
}

namespace detail {

std::size_t copy_alpha(const FourierIndex &index, int copy, int sites, int d) {
    std::vector<int> digits(sites, 0);
    for (std::size_t i = 0; i < index.positions.size(); ++i)
        if (index.positions[i].copy == copy) digits[index.positions[i].site] = index.exponents[i];
    std::size_t a = 0;
    for (int v : digits) a = a * d + v;
    return a;
}

std::vector<int> digit_weights(int d, int digits) {
    std::size_t total = 1;
    for (int i = 0; i < digits; ++i) total *= d;
    std::vector<int> w(total, 0);
    for (std::size_t a = 0; a < total; ++a) {
        std::size_t x = a;
        while (x) {
            w[a] += (x % d) != 0;
            x /= d;
        }
    }
    return w;
}

std::vector<cplx> copy_hat(const std::vector<double> &dist, int d, int sites) {
    return digit_transform(std::vector<cplx>(dist.begin(), dist.end()), d, sites);
}

std::vector<std::vector<double>> sampled_distributions(const StateEnsemble &ens, const MeasurementPlan &plan,
                                                       Rng &rng) {
    std::vector<std::vector<double>> out(plan.m);
    if (ens.pure_sampler) {
        Vector psi = ens.pure_sampler(rng);
        for (int i = 0; i < plan.m; ++i) out[i] = copy_distribution(psi, plan.ancilla, plan.rotation(i), plan.d());
    } else {
        DensityOperator rho = ens.sample(rng);
        for (int i = 0; i < plan.m; ++i) out[i] = copy_distribution(rho.rho, plan.ancilla, plan.rotation(i));
    }
    return out;
}

std::vector<std::vector<double>> state_distributions(const Matrix &rho, const MeasurementPlan &plan) {
    std::vector<std::vector<double>> out(plan.m);
    for (int i = 0; i < plan.m; ++i) out[i] = copy_distribution(rho, plan.ancilla, plan.rotation(i));
    return out;
}

namespace {

std::vector<double> kron_dists(const std::vector<std::vector<double>> &parts) {
    std::vector<double> out{1.0};
    for (const auto &p : parts) {
        std::vector<double> next(out.size() * p.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            for (std::size_t j = 0; j < p.size(); ++j) next[i * p.size() + j] = out[i] * p[j];
        out = std::move(next);
    }
    return out;
}

std::vector<Matrix> dagger_rotations(const MeasurementPlan &plan) {
    std::vector<Matrix> r;
    for (int i = 0; i < plan.m; ++i) r.push_back(plan.rotation(i).adjoint());
    return r;
}

std::vector<double> null_distribution(const MeasurementPlan &plan, int copy) {
    const auto D = static_cast<Eigen::Index>(plan.system.total_dim());
    Matrix mixed = Matrix::Identity(D, D) / static_cast<double>(D);
    return copy_distribution(mixed, plan.ancilla, plan.rotation(copy));
}

// Exact marginal outcome distribution on a set of copies from the ensemble
// moment of that order.
std::vector<double> moment_marginal(const StateEnsemble &ens, const MeasurementPlan &plan,
                                    const std::vector<int> &copies) {
    std::vector<Position> T;
    for (int c : copies)
        for (int s = 0; s < plan.sites_per_copy(); ++s) T.push_back({c, s});
    Matrix R = ens::rotated_reduced_average(ens, plan.ancilla, dagger_rotations(plan), T);
    std::vector<double> p(R.rows());
    for (Eigen::Index i = 0; i < R.rows(); ++i) p[i] = R(i, i).real();
    return p;
}

}  // namespace

std::vector<double> joint_distribution(const StateEnsemble &ens, const MeasurementPlan &plan) {
    plan.validate();
    std::size_t total = 1;
    for (int i = 0; i < plan.m; ++i) {
        total *= plan.outcome_dim();
        if (total > (std::size_t(1) << 22)) throw ResourceError("joint_distribution: history space too large");
    }
    if (ens.finite()) {
        std::vector<double> acc(total, 0.0);
        for (const auto &ws : ens.support) {
            auto p = kron_dists(state_distributions(ws.state.rho, plan));
            for (std::size_t i = 0; i < total; ++i) acc[i] += ws.weight * p[i];
        }
        return acc;
    }
    if (!ens.has_exact_moment(plan.m))
        throw std::invalid_argument("joint_distribution: ensemble has no exact moment of order " +
                                    std::to_string(plan.m));
    std::vector<int> all(plan.m);
    for (int i = 0; i < plan.m; ++i) all[i] = i;
    return moment_marginal(ens, plan, all);
}

CoefficientEngine::CoefficientEngine(const StateEnsemble &ens, const MeasurementPlan &plan, const Options &opt,
                                     int max_copies)
    : ens_(ens), plan_(plan), opt_(opt), method_(opt.method) {
    plan.validate();
    if (!(ens.reg == plan.system)) throw std::invalid_argument("ensemble and plan registers differ");
    if (plan.m > 62) throw ResourceError("plan: at most 62 copies");
    N_ = plan.sites_per_copy();
    d_ = plan.d();
    Dfull_ = plan.outcome_dim();
    max_copies = std::min(max_copies, plan.m);
    if (method_ == Method::automatic)
        method_ = ens.has_exact_moment(std::max(1, max_copies)) ? Method::moment : Method::monte_carlo;
    if ((method_ == Method::moment && !ens.has_exact_moment(std::max(1, max_copies))) ||
        (method_ == Method::enumeration && !ens.has_exact_moment(plan.m)))
        throw std::invalid_argument("ensemble '" + ens.name + "' lacks the exact moments this method needs");
    for (int i = 0; i < plan.m; ++i) null_hat_.push_back(copy_hat(null_distribution(plan, i), d_, N_));
}

std::uint64_t CoefficientEngine::mask_of(const FourierIndex &index) const {
    std::uint64_t mask = 0;
    for (const auto &p : index.positions) mask |= std::uint64_t(1) << p.copy;
    return mask;
}

void CoefficientEngine::prepare(const std::vector<FourierIndex> &indices) {
    if (method_ == Method::enumeration) {
        auto P = joint_distribution(ens_, plan_);
        std::vector<std::vector<double>> nulls;
        for (int i = 0; i < plan_.m; ++i) nulls.push_back(null_distribution(plan_, i));
        auto Q = kron_dists(nulls);
        std::vector<cplx> diff(P.size());
        for (std::size_t i = 0; i < P.size(); ++i) diff[i] = P[i] - Q[i];
        full_hat_ = digit_transform(diff, d_, N_ * plan_.m);
        return;
    }
    if (method_ == Method::moment) {
        masks_.clear();
        for (const auto &ix : indices) masks_.push_back(mask_of(ix));
        std::sort(masks_.begin(), masks_.end());
        masks_.erase(std::unique(masks_.begin(), masks_.end()), masks_.end());
        mask_hat_.assign(masks_.size(), {});
        parallel_for(masks_.size(), opt_.threads, [&](std::size_t j) {
            std::vector<int> copies;
            for (int c = 0; c < plan_.m; ++c)
                if (masks_[j] >> c & 1u) copies.push_back(c);
            auto P = moment_marginal(ens_, plan_, copies);
            std::vector<std::vector<double>> nulls;
            for (int c : copies) nulls.push_back(null_distribution(plan_, c));
            auto Q = kron_dists(nulls);
            std::vector<cplx> diff(P.size());
            for (std::size_t i = 0; i < P.size(); ++i) diff[i] = P[i] - Q[i];
            mask_hat_[j] = digit_transform(diff, d_, N_ * static_cast<int>(copies.size()));
        });
        return;
    }
    if (opt_.samples == 0) throw std::invalid_argument("Monte Carlo coefficients need samples > 0");
    if (static_cast<double>(opt_.samples) * plan_.m * static_cast<double>(Dfull_) > 5e7)
        throw ResourceError("Monte Carlo coefficient storage exceeds the budget");
    sample_hats_.assign(opt_.samples, {});
    Rng root(opt_.seed);
    parallel_for(opt_.samples, opt_.threads, [&](std::size_t s) {
        Rng r = root.derive(s);
        auto dists = sampled_distributions(ens_, plan_, r);
        std::vector<std::vector<cplx>> hats;
        for (const auto &p : dists) hats.push_back(copy_hat(p, d_, N_));
        sample_hats_[s] = std::move(hats);
    });
}

cplx CoefficientEngine::coefficient(const FourierIndex &index) const {
    if (index.positions.empty()) return 0.0;
    if (method_ == Method::enumeration) {
        std::size_t a = 0;
        for (int c = 0; c < plan_.m; ++c) {
            std::size_t ca = copy_alpha(index, c, N_, d_);
            a = a * Dfull_ + ca;
        }
        return full_hat_.at(a);
    }
    const std::uint64_t mask = mask_of(index);
    if (method_ == Method::moment) {
        auto it = std::lower_bound(masks_.begin(), masks_.end(), mask);
        if (it == masks_.end() || *it != mask) throw std::logic_error("coefficient: index was not prepared");
        std::size_t a = 0;
        for (int c = 0; c < plan_.m; ++c)
            if (mask >> c & 1u) a = a * Dfull_ + copy_alpha(index, c, N_, d_);
        return mask_hat_[it - masks_.begin()][a];
    }
    std::vector<std::pair<int, std::size_t>> parts;
    cplx null_term = 1.0;
    for (int c = 0; c < plan_.m; ++c)
        if (mask >> c & 1u) {
            std::size_t a = copy_alpha(index, c, N_, d_);
            parts.push_back({c, a});
            null_term *= null_hat_[c][a];
        }
    cplx sum = 0.0;
    for (const auto &hats : sample_hats_) {
        cplx v = 1.0;
        for (const auto &[c, a] : parts) v *= hats[c][a];
        sum += v;
    }
    return sum / static_cast<double>(sample_hats_.size()) - null_term;
}

double CoefficientEngine::variance(const FourierIndex &index) const {
    if (method_ != Method::monte_carlo || sample_hats_.size() < 2) return 0.0;
    const std::uint64_t mask = mask_of(index);
    std::vector<std::pair<int, std::size_t>> parts;
    for (int c = 0; c < plan_.m; ++c)
        if (mask >> c & 1u) parts.push_back({c, copy_alpha(index, c, N_, d_)});
    cplx mean = 0.0;
    std::vector<cplx> vals;
    for (const auto &hats : sample_hats_) {
        cplx v = 1.0;
        for (const auto &[c, a] : parts) v *= hats[c][a];
        vals.push_back(v);
        mean += v;
    }
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (const auto &v : vals) var += std::norm(v - mean);
    var /= static_cast<double>(vals.size() - 1);
    return var / static_cast<double>(vals.size());
}

AdvantageReport assemble(const std::vector<FourierIndex> &indices, const CoefficientEngine &engine, int threads) {
    AdvantageReport r;
    r.table.resize(indices.size());
    std::vector<double> var(indices.size(), 0.0);
    parallel_for(indices.size(), threads, [&](std::size_t i) {
        cplx c = engine.coefficient(indices[i]);
        r.table[i] = {indices[i], c, std::norm(c)};
        var[i] = engine.variance(indices[i]);
    });
    std::size_t max_size = 0;
    for (const auto &ix : indices) max_size = std::max(max_size, ix.positions.size());
    double total = 0.0;
    for (std::size_t s = 1; s <= max_size; ++s) {
        double bucket = 0.0;
        for (const auto &e : r.table)
            if (e.index.positions.size() == s) bucket += e.value_sq;
        total += bucket;
    }
    r.total = total;
    r.method = method_name(engine.method());
    if (engine.method() == Method::monte_carlo) {
        r.samples = engine.samples();
        double noise = 0.0, delta = 0.0;
        for (std::size_t i = 0; i < indices.size(); ++i) {
            noise += var[i];
            delta += 4.0 * r.table[i].value_sq * var[i];
        }
        r.stderr_ = std::sqrt(delta + noise * noise);
        r.extras.emplace_back("noise_floor", noise);
    }
    return r;
}

}  // namespace detail

double likelihood_ratio(const Matrix &rho, const MeasurementPlan &plan, const OutcomeRecord &history) {
    plan.validate();
    if (static_cast<int>(history.outcomes.size()) != plan.m)
        throw std::invalid_argument("likelihood_ratio: history length must equal m");
    double ratio = 1.0;
    for (int i = 0; i < plan.m; ++i) {
        std::size_t s = history.outcomes[i];
        if (s >= plan.outcome_dim()) throw std::invalid_argument("likelihood_ratio: outcome out of range");
        auto p = copy_distribution(rho, plan.ancilla, plan.rotation(i));
        const auto D = static_cast<Eigen::Index>(plan.system.total_dim());
        auto q = copy_distribution(Matrix(Matrix::Identity(D, D) / static_cast<double>(D)), plan.ancilla,
                                   plan.rotation(i));
        if (q[s] <= 0.0) throw std::domain_error("likelihood_ratio: outcome has zero null probability");
        ratio *= p[s] / q[s];
    }
    return ratio;
}

namespace {

void check_index(const MeasurementPlan &plan, const FourierIndex &index) {
    if (index.positions.size() != index.exponents.size())
        throw std::invalid_argument("FourierIndex: one exponent per position");
    for (std::size_t i = 0; i < index.positions.size(); ++i) {
        const auto &p = index.positions[i];
        if (p.copy < 0 || p.copy >= plan.m || p.site < 0 || p.site >= plan.sites_per_copy())
            throw std::invalid_argument("FourierIndex: position outside the plan");
        if (i > 0 && !(index.positions[i - 1] < p))
            throw std::invalid_argument("FourierIndex: positions must be strictly increasing");
        if (index.exponents[i] < 1 || index.exponents[i] >= plan.d())
            throw std::invalid_argument("FourierIndex: exponent outside [1, d-1]");
    }
}

}  // namespace

cplx fourier_coefficient(const StateEnsemble &ens, const MeasurementPlan &plan, const FourierIndex &index,
                         const Options &opt) {
    check_index(plan, index);
    if (index.positions.empty()) return 0.0;
    detail::CoefficientEngine engine(ens, plan, opt, index.copies());
    engine.prepare({index});
    return engine.coefficient(index);
}

namespace {

void enumerate_rec(const MeasurementPlan &plan, int max_size, int D, int kcopies, std::size_t budget,
                   std::vector<Position> &pos, std::vector<int> &exps, int start, int copies_used,
                   std::vector<int> &per_copy, std::vector<FourierIndex> &out) {
    const int N = plan.sites_per_copy();
    const int total = plan.m * N;
    for (int p = start; p < total; ++p) {
        const int copy = p / N;
        const bool new_copy = per_copy[copy] == 0;
        if (new_copy && copies_used + 1 > kcopies) continue;
        if (per_copy[copy] + 1 > D) continue;
        for (int e = 1; e < plan.d(); ++e) {
            pos.push_back({copy, p % N});
            exps.push_back(e);
            ++per_copy[copy];
            if (out.size() >= budget) throw ResourceError("index enumeration exceeds the budget");
            out.push_back({pos, exps});
            if (static_cast<int>(pos.size()) < max_size)
                enumerate_rec(plan, max_size, D, kcopies, budget, pos, exps, p + 1, copies_used + (new_copy ? 1 : 0),
                              per_copy, out);
            --per_copy[copy];
            pos.pop_back();
            exps.pop_back();
        }
    }
}

}  // namespace

std::vector<FourierIndex> enumerate_indices(const MeasurementPlan &plan, int k, std::size_t budget) {
    plan.validate();
    if (k < 0) throw std::invalid_argument("degree must be >= 0");
    const int total = plan.m * plan.sites_per_copy();
    double count = 0.0;
    for (int j = 1; j <= std::min(k, total); ++j) count += binomial_double(total, j) * std::pow(plan.d() - 1, j);
    if (count > static_cast<double>(budget)) throw ResourceError("index enumeration exceeds the budget");
    std::vector<FourierIndex> out;
    std::vector<Position> pos;
    std::vector<int> exps;
    std::vector<int> per_copy(plan.m, 0);
    if (k > 0) enumerate_rec(plan, k, plan.sites_per_copy(), plan.m, budget, pos, exps, 0, 0, per_copy, out);
    return out;
}

std::vector<FourierIndex> enumerate_copywise_indices(const MeasurementPlan &plan, int D, int k, std::size_t budget) {
    plan.validate();
    if (D < 0 || k < 0) throw std::invalid_argument("degree must be >= 0");
    std::vector<FourierIndex> out;
    std::vector<Position> pos;
    std::vector<int> exps;
    std::vector<int> per_copy(plan.m, 0);
    if (D > 0 && k > 0) enumerate_rec(plan, D * k, D, k, budget, pos, exps, 0, 0, per_copy, out);
    return out;
}

AdvantageReport degree_advantage(const StateEnsemble &ens, const MeasurementPlan &plan, int k, const Options &opt) {
    auto indices = enumerate_indices(plan, k, opt.budget);
    detail::CoefficientEngine engine(ens, plan, opt, std::min(k, plan.m));
    engine.prepare(indices);
    AdvantageReport r = detail::assemble(indices, engine, opt.threads);
    r.k = k;
    return r;
}

double likelihood_second_moment(const StateEnsemble &ens, const MeasurementPlan &plan) {
    auto P = detail::joint_distribution(ens, plan);
    double s = 0.0;
    for (double p : P) s += p * p;
    return s * static_cast<double>(P.size());
}

}  // namespace qld::lowdeg
