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
#include <set>
#include <sstream>

#include "lowdeg_internal.hpp"

namespace qld::lowdeg {

Matrix bloch_basis(double theta, double phi) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    const cplx e = std::polar(1.0, phi);
    Matrix u(2, 2);
    u << c, -std::conj(e) * s, e * s, c;
    return u;
}

namespace {

std::vector<std::pair<double, double>> grid_angles() {
    std::vector<std::pair<double, double>> out;
    for (int x = -1; x <= 1; ++x)
        for (int y = -1; y <= 1; ++y)
            for (int z = -1; z <= 1; ++z) {
                if (!x && !y && !z) continue;
                double r = std::sqrt(double(x * x + y * y + z * z));
                out.push_back({std::acos(z / r), std::atan2(double(y), double(x))});
            }
    return out;
}

}  // namespace

std::vector<Matrix> bloch_grid() {
    std::vector<Matrix> out;
    for (const auto &[t, p] : grid_angles()) out.push_back(bloch_basis(t, p));
    return out;
}

double reduced_llr(const Matrix &reduced, const std::vector<Matrix> &bases) {
    Matrix u = Matrix::Identity(1, 1);
    for (const auto &b : bases) u = kron(u, b);
    if (u.rows() != reduced.rows()) throw std::invalid_argument("reduced_llr: bases do not match the reduced state");
    auto p = born_probabilities(reduced, u);
    double s = 0.0;
    for (double v : p) s += v * v;
    return s * static_cast<double>(p.size()) - 1.0;
}

KllrResult kllr(const StateEnsemble &ens, int m, int k, const Options &opt, int refine_rounds) {
    if (ens.reg.uniform_dim() != 2) throw std::invalid_argument("kllr: local bases are qubit Bloch directions (d = 2)");
    if (m < 1 || k < 0) throw std::invalid_argument("kllr: invalid m or k");
    KllrResult out;
    if (k == 0) return out;
    const int n = ens.reg.num_sites();
    const int total = m * n;
    const int kk = std::min(k, total);
    check_dimension(std::size_t(1) << kk, "kllr");

    std::vector<std::vector<int>> subsets;
    for (int j = 1; j <= kk; ++j)
        for (auto &c : combinations(total, j)) subsets.push_back(c);
    if (subsets.size() > opt.budget) throw ResourceError("kllr: too many position sets");

    // Sampled states are shared by all position sets.
    const bool exact = ens.finite() || ens.has_exact_moment(std::min(kk, m));
    std::vector<Matrix> sampled;
    if (!exact) {
        Rng root(opt.seed);
        for (std::size_t s = 0; s < opt.samples; ++s) {
            Rng r = root.derive(s);
            sampled.push_back(ens.sample(r).rho);
        }
    }
    const auto angles = grid_angles();

    struct Best {
        double value = -1.0;
        double indist = 0.0;
        std::vector<Matrix> bases;
    };
    std::vector<Best> best(subsets.size());
    parallel_for(subsets.size(), opt.threads, [&](std::size_t idx) {
        std::vector<Position> T;
        for (int p : subsets[idx]) T.push_back({p / n, p % n});
        Matrix R;
        if (exact) {
            R = ens::rotated_reduced_average(ens, 0, {}, T);
        } else {
            for (const auto &rho : sampled) {
                Matrix red = ens::rotated_reduced_state(rho, ens.reg, 0, {}, T);
                if (R.size() == 0)
                    R = red;
                else
                    R += red;
            }
            R /= static_cast<double>(sampled.size());
        }
        const int t = static_cast<int>(T.size());
        const auto dim = static_cast<Eigen::Index>(1) << t;
        Best b;
        b.indist = 0.5 * trace_norm_hermitian(R - Matrix::Identity(dim, dim) / static_cast<double>(dim));
        std::vector<std::pair<double, double>> cur(t, angles[0]);
        auto eval = [&](const std::vector<std::pair<double, double>> &a) {
            std::vector<Matrix> bs;
            for (const auto &[th, ph] : a) bs.push_back(bloch_basis(th, ph));
            return reduced_llr(R, bs);
        };
        double curv = -1.0;
        std::size_t combos = 1;
        for (int j = 0; j < t; ++j) combos *= angles.size();
        if (combos <= 20000) {
            std::vector<std::size_t> digit(t, 0);
            for (std::size_t c = 0; c < combos; ++c) {
                std::size_t rest = c;
                std::vector<std::pair<double, double>> a(t);
                for (int j = t - 1; j >= 0; --j) {
                    a[j] = angles[rest % angles.size()];
                    rest /= angles.size();
                }
                double v = eval(a);
                if (v > curv + 1e-15) {
                    curv = v;
                    cur = a;
                }
            }
        } else {
            curv = eval(cur);
            for (int round = 0; round < 2; ++round)
                for (int j = 0; j < t; ++j)
                    for (const auto &ang : angles) {
                        auto a = cur;
                        a[j] = ang;
                        double v = eval(a);
                        if (v > curv + 1e-15) {
                            curv = v;
                            cur = a;
                        }
                    }
        }
        // Coordinate refinement around the best grid point.
        double step = 0.2;
        for (int round = 0; round < refine_rounds; ++round, step /= 4.0)
            for (int j = 0; j < t; ++j)
                for (int which = 0; which < 2; ++which)
                    for (double sgn : {-1.0, 1.0}) {
                        auto a = cur;
                        (which ? a[j].second : a[j].first) += sgn * step;
                        double v = eval(a);
                        if (v > curv + 1e-15) {
                            curv = v;
                            cur = a;
                        }
                    }
        b.value = curv;
        for (const auto &[th, ph] : cur) b.bases.push_back(bloch_basis(th, ph));
        best[idx] = std::move(b);
    });
    std::size_t arg = 0;
    for (std::size_t i = 0; i < best.size(); ++i) {
        if (best[i].value > best[arg].value) arg = i;
        out.indistinguishability = std::max(out.indistinguishability, best[i].indist);
    }
    out.value = std::max(0.0, best[arg].value);
    for (int p : subsets[arg]) out.witness.push_back({p / n, p % n});
    out.witness_bases = best[arg].bases;
    out.bound = out.indistinguishability * out.indistinguishability * std::pow(4.0, k);
    return out;
}

int light_cone_size(int depth, int geometry_dim, int t, int n) {
    if (depth < 0 || geometry_dim < 1 || t < 0 || n < 0) throw std::invalid_argument("light_cone_size: invalid input");
    if (depth == 0) return std::min(t, n);
    double cone = static_cast<double>(t) * std::pow(2.0 * depth, geometry_dim);
    return static_cast<int>(std::min<double>(n, cone));
}

AuditKind audit_kind_from_string(const std::string &s) {
    if (s == "local-llr") return AuditKind::local_llr;
    if (s == "design-local") return AuditKind::design_local;
    if (s == "copywise") return AuditKind::copywise;
    if (s == "within-block") return AuditKind::within_block;
    if (s == "among-block") return AuditKind::among_block;
    throw std::invalid_argument("unknown audit kind '" + s + "'");
}

std::string audit_kind_name(AuditKind k) {
    switch (k) {
        case AuditKind::local_llr: return "local-llr";
        case AuditKind::design_local: return "design-local";
        case AuditKind::copywise: return "copywise";
        case AuditKind::within_block: return "within-block";
        case AuditKind::among_block: return "among-block";
    }
    return "unknown";
}

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

// Largest sum of squared coefficients supported inside one position set of
// size k: the plan's own k-local likelihood deviation.
double plan_kllr(const AdvantageReport &rep, int total_positions, int k, int N) {
    double best = 0.0;
    const int kk = std::min(k, total_positions);
    for (const auto &T : combinations(total_positions, kk)) {
        std::set<int> in(T.begin(), T.end());
        double s = 0.0;
        for (const auto &e : rep.table) {
            bool inside = true;
            for (const auto &p : e.index.positions)
                if (!in.count(p.copy * N + p.site)) {
                    inside = false;
                    break;
                }
            if (inside) s += e.value_sq;
        }
        best = std::max(best, s);
    }
    return best;
}

}  // namespace

AuditResult bound_audit(AuditKind kind, const AuditInstance &inst) {
    AuditResult r;
    r.kind = kind;
    if (inst.k == 0) {
        r.pass = true;
        r.detail = "degree 0: both sides are 0 by convention";
        return r;
    }
    const Options &opt = inst.options;
    switch (kind) {
        case AuditKind::local_llr: {
            if (!inst.ensemble) throw std::invalid_argument("audit: ensemble required");
            const auto &plan = inst.plan;
            auto rep = degree_advantage(*inst.ensemble, plan, inst.k, opt);
            const int N = plan.sites_per_copy();
            const int total = plan.m * N;
            double eps2 = plan_kllr(rep, total, inst.k, N);
            r.lhs = rep.total;
            r.rhs = eps2 * inst.k * std::pow(static_cast<double>(total), inst.k);
            r.detail = "eps^2=" + fmt(eps2);
            break;
        }
        case AuditKind::design_local: {
            if (!inst.ensemble) throw std::invalid_argument("audit: ensemble required");
            const auto &plan = inst.plan;
            std::vector<Matrix> rot;
            for (int i = 0; i < plan.m; ++i) rot.push_back(plan.rotation(i).adjoint());
            Rng rng(opt.seed);
            auto est = ens::local_indistinguishability(*inst.ensemble, plan.m, inst.T, rot, plan.ancilla, opt.samples,
                                                       rng, true);
            const double t = static_cast<double>(inst.T.size());
            const double n = plan.system.num_sites();
            const double a = plan.ancilla;
            r.lhs = est.estimate;
            r.rhs = plan.m * std::pow(2.0, t / 2.0) *
                    std::pow(2.0 * std::pow(2.0, t + 11.0 * a - n) + 3.0 * inst.epsilon, 0.25);
            r.detail = est.exact ? "exact" : "monte-carlo stderr=" + fmt(est.stderr_);
            break;
        }
        case AuditKind::copywise: {
            if (!inst.ensemble) throw std::invalid_argument("audit: ensemble required");
            const auto &plan = inst.plan;
            if (plan.ancilla != 0) throw std::invalid_argument("audit: copywise audit needs a plan without ancillas");
            auto rep = copywise_advantage(*inst.ensemble, plan, inst.D, inst.k, opt);
            double eps = 0.0;
            for (int i = 0; i < plan.m; ++i)
                for (int t = 1; t <= inst.k; ++t)
                    eps = std::max(eps, truncated_pair_moment(*inst.ensemble, 0, plan.rotation(i), inst.D, t, true, opt));
            r.lhs = rep.total;
            r.rhs = inst.k * std::pow(static_cast<double>(plan.m), inst.k) * eps;
            r.detail = "eps=" + fmt(eps);
            break;
        }
        case AuditKind::within_block:
        case AuditKind::among_block: {
            if (!inst.ensemble || !inst.tree) throw std::invalid_argument("audit: ensemble and tree required");
            AdaptiveTree tree = *inst.tree;
            tree.structure = kind == AuditKind::within_block ? Structure::within_block : Structure::among_block;
            auto rep = adaptive_tree_advantage(*inst.ensemble, tree, inst.D, inst.k, opt);
            r.lhs = rep.total;
            r.rhs = rep.extra("bound");
            r.detail = "eps=" + fmt(rep.extra("bound_epsilon")) + " M=" + fmt(rep.extra("M"));
            break;
        }
    }
    r.pass = r.lhs <= r.rhs + 1e-12;
    return r;
}

}  // namespace qld::lowdeg
