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

#include "qld/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace qld {

QuditRegister::QuditRegister(std::vector<int> local_dims) : dims_(std::move(local_dims)) {
    total_ = 1;
    for (int d : dims_) {
        if (d < 2) throw std::invalid_argument("QuditRegister: local dimension must be >= 2");
        if (total_ > std::numeric_limits<std::size_t>::max() / static_cast<std::size_t>(d))
            throw ResourceError("QuditRegister: total dimension overflows");
        total_ *= static_cast<std::size_t>(d);
    }
}

QuditRegister QuditRegister::uniform(int num_sites, int d) {
    if (num_sites < 0) throw std::invalid_argument("QuditRegister: negative site count");
    return QuditRegister(std::vector<int>(num_sites, d));
}

int QuditRegister::uniform_dim() const {
    if (dims_.empty()) throw std::invalid_argument("QuditRegister: empty register has no local dimension");
    for (int d : dims_)
        if (d != dims_[0]) throw std::invalid_argument("QuditRegister: mixed local dimensions");
    return dims_[0];
}

QuditRegister QuditRegister::concat(const QuditRegister &other) const {
    std::vector<int> d = dims_;
    d.insert(d.end(), other.dims_.begin(), other.dims_.end());
    return QuditRegister(std::move(d));
}

QuditRegister QuditRegister::restrict_to(const std::vector<int> &sites) const {
    std::vector<int> d;
    for (int s : sites) d.push_back(dims_.at(s));
    return QuditRegister(std::move(d));
}

std::vector<int> QuditRegister::digits(std::size_t index) const {
    std::vector<int> out(dims_.size());
    for (int s = num_sites() - 1; s >= 0; --s) {
        out[s] = static_cast<int>(index % dims_[s]);
        index /= dims_[s];
    }
    return out;
}

std::size_t QuditRegister::index(const std::vector<int> &digits) const {
    std::size_t idx = 0;
    for (int s = 0; s < num_sites(); ++s) idx = idx * dims_[s] + digits.at(s);
    return idx;
}

PureState::PureState(QuditRegister r, Vector a) : reg(std::move(r)), amp(std::move(a)) {
    if (static_cast<std::size_t>(amp.size()) != reg.total_dim())
        throw std::invalid_argument("PureState: amplitude length does not match register");
}

PureState PureState::basis(const QuditRegister &r, std::size_t index) {
    Vector v = Vector::Zero(r.total_dim());
    v(index) = 1.0;
    return PureState(r, v);
}

void PureState::validate() const {
    if (std::abs(amp.norm() - 1.0) > 1e-12) throw std::domain_error("PureState: norm differs from 1");
}

DensityOperator::DensityOperator(QuditRegister r, Matrix m) : reg(std::move(r)), rho(std::move(m)) {
    if (static_cast<std::size_t>(rho.rows()) != reg.total_dim() || rho.rows() != rho.cols())
        throw std::invalid_argument("DensityOperator: matrix side does not match register");
}

DensityOperator DensityOperator::from_pure(const PureState &psi) {
    return DensityOperator(psi.reg, psi.amp * psi.amp.adjoint());
}

DensityOperator DensityOperator::maximally_mixed(const QuditRegister &r) {
    check_dimension(r.total_dim(), "maximally_mixed");
    const auto n = static_cast<Eigen::Index>(r.total_dim());
    return DensityOperator(r, Matrix::Identity(n, n) / static_cast<double>(n));
}

void DensityOperator::validate() const {
    if (max_abs(rho - rho.adjoint()) > 1e-10) throw std::domain_error("DensityOperator: not Hermitian");
    if (std::abs(rho.trace() - cplx(1.0)) > 1e-10) throw std::domain_error("DensityOperator: trace differs from 1");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8) throw std::domain_error("DensityOperator: negative eigenvalue");
}

double DensityOperator::purity() const { return (rho.cwiseAbs2()).sum(); }

ProjectiveMeasurement::ProjectiveMeasurement(QuditRegister r, Matrix u, std::string l)
    : reg(std::move(r)), rotation(std::move(u)), label(std::move(l)) {
    if (static_cast<std::size_t>(rotation.rows()) != reg.total_dim())
        throw std::invalid_argument("ProjectiveMeasurement: rotation side does not match register");
    if (!is_unitary(rotation)) throw std::invalid_argument("ProjectiveMeasurement: rotation is not unitary");
}

ProjectiveMeasurement ProjectiveMeasurement::computational(const QuditRegister &r) {
    check_dimension(r.total_dim(), "computational measurement");
    const auto n = static_cast<Eigen::Index>(r.total_dim());
    return ProjectiveMeasurement(r, Matrix::Identity(n, n), "computational");
}

ProjectiveMeasurement ProjectiveMeasurement::product(const QuditRegister &r, const std::vector<Matrix> &local,
                                                     std::string label) {
    if (static_cast<int>(local.size()) != r.num_sites())
        throw std::invalid_argument("ProjectiveMeasurement::product: one local unitary per site required");
    check_dimension(r.total_dim(), "product measurement");
    Matrix u = Matrix::Identity(1, 1);
    for (const auto &l : local) u = kron(u, l);
    return ProjectiveMeasurement(r, u, std::move(label));
}

OutcomeRecord OutcomeRecord::from_outcomes(const QuditRegister &r, std::vector<std::size_t> outcomes) {
    OutcomeRecord rec;
    rec.outcomes = std::move(outcomes);
    for (auto o : rec.outcomes) rec.grid.push_back(r.digits(o));
    return rec;
}

bool OutcomeRecord::consistent(const QuditRegister &r) const {
    if (grid.empty()) return true;
    if (grid.size() != outcomes.size()) return false;
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (r.index(grid[i]) != outcomes[i]) return false;
    return true;
}

Matrix kron(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

Vector kron(const Vector &a, const Vector &b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a(i) * b;
    return out;
}

DensityOperator tensor_product(const DensityOperator &a, const DensityOperator &b) {
    QuditRegister r = a.reg.concat(b.reg);
    check_dimension(r.total_dim(), "tensor_product");
    DensityOperator out(r, kron(a.rho, b.rho));
    if (invariant_checks()) out.validate();
    return out;
}

PureState tensor_product(const PureState &a, const PureState &b) {
    QuditRegister r = a.reg.concat(b.reg);
    check_dimension(r.total_dim(), "tensor_product");
    return PureState(r, kron(a.amp, b.amp));
}

Matrix partial_trace(const Matrix &rho, const QuditRegister &reg, std::vector<int> keep) {
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    for (int s : keep)
        if (s < 0 || s >= reg.num_sites()) throw std::invalid_argument("partial_trace: invalid site index");
    if (static_cast<int>(keep.size()) == reg.num_sites()) return rho;

    std::vector<int> traced;
    for (int s = 0, j = 0; s < reg.num_sites(); ++s) {
        if (j < static_cast<int>(keep.size()) && keep[j] == s)
            ++j;
        else
            traced.push_back(s);
    }
    QuditRegister kreg = reg.restrict_to(keep);
    QuditRegister treg = reg.restrict_to(traced);
    std::vector<std::vector<Eigen::Index>> groups(treg.total_dim());
    for (std::size_t i = 0; i < reg.total_dim(); ++i) {
        auto dg = reg.digits(i);
        std::size_t t = 0;
        for (int s : traced) t = t * reg.dim(s) + dg[s];
        groups[t].push_back(static_cast<Eigen::Index>(i));
    }
    const auto kd = static_cast<Eigen::Index>(kreg.total_dim());
    Matrix out = Matrix::Zero(kd, kd);
    for (const auto &g : groups) out += rho(g, g);
    return out;
}

DensityOperator partial_trace(const DensityOperator &state, std::vector<int> keep) {
    std::sort(keep.begin(), keep.end());
    keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
    DensityOperator out(state.reg.restrict_to(keep), partial_trace(state.rho, state.reg, keep));
    if (invariant_checks()) out.validate();
    return out;
}

double trace_norm_hermitian(const Matrix &h) {
    Matrix sym = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

double trace_distance(const DensityOperator &a, const DensityOperator &b) {
    if (!(a.reg == b.reg)) throw std::invalid_argument("trace_distance: register mismatch");
    return 0.5 * trace_norm_hermitian(a.rho - b.rho);
}

Matrix reset_site_to_mixed(const Matrix &rho, const QuditRegister &reg, int site) {
    if (site < 0 || site >= reg.num_sites()) throw std::invalid_argument("depolarize: invalid site index");
    const std::size_t dim = reg.total_dim();
    const int d = reg.dim(site);
    std::size_t stride = 1;
    for (int s = reg.num_sites() - 1; s > site; --s) stride *= reg.dim(s);
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    // Indices with site digit zero enumerate the complement; a block of d
    // entries spaced by stride shares the complement digits.
    std::vector<std::size_t> base;
    for (std::size_t i = 0; i < dim; ++i)
        if ((i / stride) % d == 0) base.push_back(i);
    for (std::size_t bi : base) {
        for (std::size_t bj : base) {
            cplx acc = 0.0;
            for (int a = 0; a < d; ++a) acc += rho(bi + a * stride, bj + a * stride);
            acc /= static_cast<double>(d);
            for (int a = 0; a < d; ++a) out(bi + a * stride, bj + a * stride) = acc;
        }
    }
    return out;
}

DensityOperator depolarize(const DensityOperator &state, double rate, DepolarizeScope scope,
                           const std::vector<int> &sites) {
    if (!(rate >= 0.0 && rate <= 1.0)) throw std::invalid_argument("depolarize: rate outside [0,1]");
    Matrix rho = state.rho;
    if (scope == DepolarizeScope::global) {
        const auto n = rho.rows();
        rho = (1.0 - rate) * rho + rate * Matrix::Identity(n, n) / static_cast<double>(n);
    } else {
        std::vector<int> list = sites;
        if (list.empty()) {
            list.resize(state.reg.num_sites());
            std::iota(list.begin(), list.end(), 0);
        }
        for (int s : list) {
            if (rate == 0.0) break;
            rho = (1.0 - rate) * rho + rate * reset_site_to_mixed(rho, state.reg, s);
        }
    }
    DensityOperator out(state.reg, std::move(rho));
    if (invariant_checks()) out.validate();
    return out;
}

DensityOperator conjugate(const DensityOperator &state, const Matrix &u) {
    DensityOperator out(state.reg, u * state.rho * u.adjoint());
    if (invariant_checks()) out.validate();
    return out;
}

std::vector<std::size_t> permutation_index_map(int d, const std::vector<int> &perm) {
    const int t = static_cast<int>(perm.size());
    {
        std::vector<int> sorted = perm;
        std::sort(sorted.begin(), sorted.end());
        for (int a = 0; a < t; ++a)
            if (sorted[a] != a) throw std::invalid_argument("permutation_operator: not a permutation");
    }
    QuditRegister reg = QuditRegister::uniform(t, d);
    check_dimension(reg.total_dim(), "permutation_operator");
    std::vector<std::size_t> map(reg.total_dim());
    std::vector<int> out(t);
    for (std::size_t j = 0; j < reg.total_dim(); ++j) {
        auto in = reg.digits(j);
        // The factor in position a moves to position perm[a].
        for (int a = 0; a < t; ++a) out[perm[a]] = in[a];
        map[j] = reg.index(out);
    }
    return map;
}

Matrix permutation_operator(int d, const std::vector<int> &perm) {
    auto map = permutation_index_map(d, perm);
    const auto n = static_cast<Eigen::Index>(map.size());
    Matrix p = Matrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) p(map[j], j) = 1.0;
    return p;
}

std::vector<double> born_probabilities(const Matrix &rho, const Matrix &rotation) {
    Matrix ru = rho * rotation;
    const auto n = rotation.cols();
    std::vector<double> p(n);
    double total = 0.0;
    for (Eigen::Index x = 0; x < n; ++x) {
        double v = rotation.col(x).dot(ru.col(x)).real();
        if (v < -1e-8) throw std::domain_error("born_probabilities: negative outcome probability");
        if (v < 0.0) v = 0.0;
        p[x] = v;
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-8) throw std::domain_error("born_probabilities: probabilities do not sum to 1");
    for (auto &v : p) v /= total;
    return p;
}

std::vector<double> born_probabilities(const DensityOperator &state, const ProjectiveMeasurement &meas) {
    if (!(state.reg == meas.reg)) throw std::invalid_argument("born_probabilities: register mismatch");
    return born_probabilities(state.rho, meas.rotation);
}

std::size_t sample_index(const std::vector<double> &probs, Rng &rng) {
    double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    // Floating slack: return the last outcome with positive weight.
    for (std::size_t i = probs.size(); i-- > 0;)
        if (probs[i] > 0.0) return i;
    return probs.size() - 1;
}

std::size_t sample_outcome(const DensityOperator &state, const ProjectiveMeasurement &meas, Rng &rng) {
    return sample_index(born_probabilities(state, meas), rng);
}

void apply_gate(Vector &psi, const QuditRegister &reg, const Matrix &gate, const std::vector<int> &sites) {
    const int k = static_cast<int>(sites.size());
    std::vector<std::size_t> stride(reg.num_sites());
    std::size_t s = 1;
    for (int i = reg.num_sites() - 1; i >= 0; --i) {
        stride[i] = s;
        s *= reg.dim(i);
    }
    std::size_t gdim = 1;
    for (int q : sites) gdim *= reg.dim(q);
    if (static_cast<std::size_t>(gate.rows()) != gdim) throw std::invalid_argument("apply_gate: gate size mismatch");
    // Offsets of the gate's local basis inside the flat index.
    QuditRegister greg = reg.restrict_to(sites);
    std::vector<std::size_t> offset(gdim);
    for (std::size_t g = 0; g < gdim; ++g) {
        auto dg = greg.digits(g);
        std::size_t off = 0;
        for (int j = 0; j < k; ++j) off += dg[j] * stride[sites[j]];
        offset[g] = off;
    }
    std::vector<char> on_gate(reg.num_sites(), 0);
    for (int q : sites) on_gate[q] = 1;
    Vector local(gdim), res(gdim);
    for (std::size_t i = 0; i < reg.total_dim(); ++i) {
        bool base = true;
        for (int q : sites)
            if ((i / stride[q]) % reg.dim(q) != 0) {
                base = false;
                break;
            }
        if (!base) continue;
        for (std::size_t g = 0; g < gdim; ++g) local(g) = psi(i + offset[g]);
        res.noalias() = gate * local;
        for (std::size_t g = 0; g < gdim; ++g) psi(i + offset[g]) = res(g);
    }
}

double max_abs(const Matrix &m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool is_unitary(const Matrix &u, double tol) {
    if (u.rows() != u.cols()) return false;
    return max_abs(u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())) <= tol;
}

}  // namespace qld
