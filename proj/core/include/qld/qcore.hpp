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

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qld/common.hpp"

namespace qld {

class QuditRegister {
  public:
    QuditRegister() = default;
    explicit QuditRegister(std::vector<int> local_dims);
    static QuditRegister uniform(int num_sites, int d);

    int num_sites() const { return static_cast<int>(dims_.size()); }
    int dim(int site) const { return dims_.at(site); }
    const std::vector<int> &local_dims() const { return dims_; }
    std::size_t total_dim() const { return total_; }
    // Local dimension when all sites agree; throws otherwise.
    int uniform_dim() const;

    QuditRegister concat(const QuditRegister &other) const;
    QuditRegister restrict_to(const std::vector<int> &sites) const;

    // Mixed-radix digits of a flat index, site 0 most significant.
    std::vector<int> digits(std::size_t index) const;
    std::size_t index(const std::vector<int> &digits) const;

    bool operator==(const QuditRegister &o) const { return dims_ == o.dims_; }

  private:
    std::vector<int> dims_;
    std::size_t total_ = 1;
};

struct PureState {
    QuditRegister reg;
    Vector amp;

    PureState() = default;
    PureState(QuditRegister r, Vector a);
    static PureState basis(const QuditRegister &r, std::size_t index);
    void validate() const;
};

struct DensityOperator {
    QuditRegister reg;
    Matrix rho;

    DensityOperator() = default;
    DensityOperator(QuditRegister r, Matrix m);
    static DensityOperator from_pure(const PureState &psi);
    static DensityOperator maximally_mixed(const QuditRegister &r);
    // Throws std::domain_error when Hermiticity, trace or positivity fail.
    void validate() const;
    double purity() const;
};

struct ProjectiveMeasurement {
    QuditRegister reg;
    Matrix rotation;  // outcome x has projector U|x><x|U^dagger
    std::string label;

    ProjectiveMeasurement() = default;
    ProjectiveMeasurement(QuditRegister r, Matrix u, std::string label);
    static ProjectiveMeasurement computational(const QuditRegister &r);
    // Product measurement from per-site local unitaries.
    static ProjectiveMeasurement product(const QuditRegister &r, const std::vector<Matrix> &local, std::string label);
};

struct OutcomeRecord {
    std::vector<std::size_t> outcomes;
    std::vector<std::vector<int>> grid;  // copy x site digits, empty when not recorded

    static OutcomeRecord from_outcomes(const QuditRegister &r, std::vector<std::size_t> outcomes);
    bool consistent(const QuditRegister &r) const;
};

Matrix kron(const Matrix &a, const Matrix &b);
Vector kron(const Vector &a, const Vector &b);

DensityOperator tensor_product(const DensityOperator &a, const DensityOperator &b);
PureState tensor_product(const PureState &a, const PureState &b);

DensityOperator partial_trace(const DensityOperator &state, std::vector<int> keep);
// Raw form on a bare matrix over `reg`.
Matrix partial_trace(const Matrix &rho, const QuditRegister &reg, std::vector<int> keep);

double trace_distance(const DensityOperator &a, const DensityOperator &b);
double trace_norm_hermitian(const Matrix &h);

enum class DepolarizeScope { global, per_site };
DensityOperator depolarize(const DensityOperator &state, double rate, DepolarizeScope scope,
                           const std::vector<int> &sites = {});
// Replaces one site by I/d after tracing it out.
Matrix reset_site_to_mixed(const Matrix &rho, const QuditRegister &reg, int site);

DensityOperator conjugate(const DensityOperator &state, const Matrix &u);

// Index map of P_pi on (C^d)^{t}: column j has its single 1 in row map[j].
std::vector<std::size_t> permutation_index_map(int d, const std::vector<int> &perm);
Matrix permutation_operator(int d, const std::vector<int> &perm);

std::vector<double> born_probabilities(const DensityOperator &state, const ProjectiveMeasurement &meas);
std::vector<double> born_probabilities(const Matrix &rho, const Matrix &rotation);
std::size_t sample_outcome(const DensityOperator &state, const ProjectiveMeasurement &meas, Rng &rng);
std::size_t sample_index(const std::vector<double> &probs, Rng &rng);

// Applies a gate acting on `sites` (first listed site most significant) to a
// pure-state vector over `reg`.
void apply_gate(Vector &psi, const QuditRegister &reg, const Matrix &gate, const std::vector<int> &sites);

double max_abs(const Matrix &m);
bool is_unitary(const Matrix &u, double tol = 1e-10);

}  // namespace qld
