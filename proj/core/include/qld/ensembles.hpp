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

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qld/common.hpp"
#include "qld/qcore.hpp"

namespace qld::ens {

struct WeightedState {
    double weight = 0.0;
    DensityOperator state;
};

struct StateEnsemble {
    std::string name;
    QuditRegister reg;
    std::function<DensityOperator(Rng &)> sampler;
    // Set for ensembles of pure states; preferred by moment estimators.
    std::function<Vector(Rng &)> pure_sampler;
    // Non-empty when the ensemble has finite support (exact averaging).
    std::vector<WeightedState> support;
    // E[rho^{(x) k}] for k <= exact_moment_max.
    std::function<Matrix(int)> exact_moment;
    int exact_moment_max = -1;
    bool haar = false;
    std::vector<std::pair<std::string, double>> parameters;

    bool finite() const { return !support.empty(); }
    bool has_exact_moment(int k) const { return finite() || (exact_moment && k <= exact_moment_max); }
    // Exact E[rho^{(x) k}]; throws std::invalid_argument when unavailable.
    Matrix moment(int k) const;
    DensityOperator sample(Rng &rng) const { return sampler(rng); }
};

StateEnsemble make_haar_ensemble(const QuditRegister &reg);
StateEnsemble make_haar_ensemble(int d);
StateEnsemble make_finite_ensemble(std::string name, std::vector<WeightedState> support);
StateEnsemble make_point_ensemble(std::string name, const DensityOperator &state);

// Stabilizer states.
Integer stabilizer_count(int n);
// Orbit of |0...0> under H, S and CNOT, up to global phase (n <= 3).
std::vector<Vector> stabilizer_orbit(int n);
// Uniform random stabilizer state from the affine/quadratic-form normal form.
Vector sample_stabilizer_state(int n, Rng &rng);
StateEnsemble make_stabilizer_ensemble(int n);

// Random circuits.
enum class Architecture { brickwork, coarse_grained };

struct Gate {
    std::vector<int> sites;
    Matrix unitary;  // empty in a layout
};

struct CircuitSpec {
    int n = 0;
    int depth = 0;
    Architecture arch = Architecture::brickwork;
    int block = 2;
    std::vector<std::vector<Gate>> layers;
};

CircuitSpec make_circuit_layout(int n, int depth, Architecture arch, int block = 2);
CircuitSpec sample_circuit(const CircuitSpec &layout, Rng &rng);
void apply_circuit(const CircuitSpec &circuit, Vector &psi);
Matrix circuit_unitary(const CircuitSpec &circuit);
PureState sample_brickwork(const CircuitSpec &layout, Rng &rng);
StateEnsemble make_circuit_ensemble(int n, int depth, Architecture arch, int block = 2);

// Random Hamiltonians and Gibbs states.
enum class HamiltonianKind { gue, rsps };

struct HamiltonianSpec {
    HamiltonianKind kind = HamiltonianKind::gue;
    int n = 0;
    int J = 0;
    std::vector<std::string> paulis;
    std::vector<int> signs;
    Matrix matrix;
};

Matrix pauli_string_matrix(const std::string &pauli);
HamiltonianSpec sample_gue(int n, Rng &rng);
HamiltonianSpec sample_rsps(int n, int J, Rng &rng);
double operator_norm(const Matrix &hermitian);
DensityOperator gibbs_state(const HamiltonianSpec &h, double beta);
DensityOperator gibbs_state(const QuditRegister &reg, const Matrix &h, double beta);
StateEnsemble make_gibbs_ensemble(HamiltonianKind kind, int n, double beta, int J = 0);

// Approximate-design certification.
enum class DesignMode { exact, monte_carlo };

struct DesignReport {
    std::string ensemble;
    int k = 0;
    double epsilon = 0.0;  // +inf when the ensemble moment is singular on the symmetric subspace
    bool exact = false;
    std::size_t samples = 0;
    std::size_t sym_dim = 0;
    double lambda_min = 0.0;  // extremes of the generalized eigenvalues of (M_Haar, M)
    double lambda_max = 0.0;
    bool singular = false;
    bool non_psd_noise = false;
    double sampling_error = 0.0;
};

// Orthonormal basis of Sym^k(C^D), one column per sorted multiset.
Matrix symmetric_basis(std::size_t D, int k);
DesignReport design_certify(const StateEnsemble &ens, int k, DesignMode mode, std::size_t samples, Rng &rng,
                            int threads = 1);

// Local indistinguishability.
struct Position {
    int copy = 0;
    int site = 0;
    bool operator==(const Position &o) const { return copy == o.copy && site == o.site; }
    bool operator<(const Position &o) const { return copy != o.copy ? copy < o.copy : site < o.site; }
};

struct IndistinguishabilityEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
    bool exact = false;
    std::size_t samples = 0;
};

// Reduced state on T of tr_{not T}[ (x)_i U_i (rho (x) |0><0|^ancilla) U_i^dagger ] for
// one state rho; rotations are indexed by copy (empty means identity).
Matrix rotated_reduced_state(const Matrix &rho, const QuditRegister &reg, int ancilla,
                             const std::vector<Matrix> &rotations, const std::vector<Position> &T);
// Exact ensemble average of the above, from the ensemble moment of order |supp T|.
Matrix rotated_reduced_average(const StateEnsemble &ens, int ancilla, const std::vector<Matrix> &rotations,
                               const std::vector<Position> &T);

IndistinguishabilityEstimate local_indistinguishability(const StateEnsemble &ens, int m,
                                                        const std::vector<Position> &T,
                                                        const std::vector<Matrix> &rotations, int ancilla,
                                                        std::size_t samples, Rng &rng, bool prefer_exact = true);

}  // namespace qld::ens
