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
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qld/common.hpp"
#include "qld/ensembles.hpp"
#include "qld/qcore.hpp"

namespace qld::lowdeg {

using ens::Position;
using ens::StateEnsemble;

enum class Locality { local, bounded_depth, general };

// Nonadaptive m-copy protocol. Copy i measures the system (plus `ancilla`
// sites prepared in |0>, appended after the system) with the PVM
// {U_i |x><x| U_i^dagger}; rotations[i] is U_i, empty meaning identity.
struct MeasurementPlan {
    int m = 1;
    QuditRegister system;
    int ancilla = 0;
    std::vector<Matrix> rotations;
    Locality locality = Locality::general;
    int depth = 0;         // bounded-depth plans
    int geometry_dim = 1;  // bounded-depth plans
    std::string label;

    int d() const { return system.uniform_dim(); }
    int sites_per_copy() const { return system.num_sites() + ancilla; }
    std::size_t outcome_dim() const;
    // Identity when no rotation was supplied.
    Matrix rotation(int copy) const;
    void validate() const;
};

MeasurementPlan computational_plan(const QuditRegister &system, int m);
// local[i][q] is the d x d unitary for site q of copy i.
MeasurementPlan product_plan(const QuditRegister &system, const std::vector<std::vector<Matrix>> &local,
                             std::string label = "product");
MeasurementPlan random_local_plan(const QuditRegister &system, int m, Rng &rng);
MeasurementPlan global_plan(const QuditRegister &system, int m, int ancilla, const std::vector<Matrix> &rotations,
                            std::string label = "global");

// Outcome distribution of one copy: <x| U^dagger (rho (x) |0><0|) U |x>.
std::vector<double> copy_distribution(const Matrix &rho, int ancilla, const Matrix &rotation);
std::vector<double> copy_distribution(const Vector &psi, int ancilla, const Matrix &rotation, int d);

struct FourierIndex {
    std::vector<Position> positions;  // strictly increasing
    std::vector<int> exponents;       // in [1, d-1]
    int copies() const;
    bool operator==(const FourierIndex &o) const { return positions == o.positions && exponents == o.exponents; }
};

// f^(alpha) = sum_x f(x) exp(-2 pi i alpha.x / d) over `digits` radix-d digits,
// site 0 most significant. The result is indexed like the input.
std::vector<cplx> digit_transform(const std::vector<cplx> &f, int d, int digits);

struct CoefficientEntry {
    FourierIndex index;
    cplx value;
    double value_sq = 0.0;
};

struct AdvantageReport {
    int k = 0;
    int D = -1;  // per-copy degree for copy-wise reports; -1 otherwise
    std::vector<CoefficientEntry> table;
    double total = 0.0;
    std::string method;
    std::size_t samples = 0;
    double stderr_ = 0.0;
    std::vector<std::pair<std::string, double>> extras;

    double extra(const std::string &key) const;
    bool has_extra(const std::string &key) const;
};

enum class Method { automatic, enumeration, moment, monte_carlo };
std::string method_name(Method m);

struct Options {
    Method method = Method::automatic;
    std::size_t samples = 10000;
    std::uint64_t seed = 0;
    int threads = 1;
    std::size_t budget = 1000000;
};

// prod_i P_rho(s_i) / P_null(s_i), the null being I/D on the system.
double likelihood_ratio(const Matrix &rho, const MeasurementPlan &plan, const OutcomeRecord &history);

cplx fourier_coefficient(const StateEnsemble &ens, const MeasurementPlan &plan, const FourierIndex &index,
                         const Options &opt = {});

// All nonempty indices with at most k positions, lexicographic in (copy, site, exponent).
std::vector<FourierIndex> enumerate_indices(const MeasurementPlan &plan, int k, std::size_t budget);
// Indices touching at most k copies with at most D positions in each.
std::vector<FourierIndex> enumerate_copywise_indices(const MeasurementPlan &plan, int D, int k, std::size_t budget);

AdvantageReport degree_advantage(const StateEnsemble &ens, const MeasurementPlan &plan, int k,
                                 const Options &opt = {});
// E_s[(E_rho L(s))^2] over the uniform reference, by full enumeration.
double likelihood_second_moment(const StateEnsemble &ens, const MeasurementPlan &plan);

// Exact squared degree-(D,k) advantage plus the Hoelder bound (extras
// "holder_bound" and "pair_value"; the latter recomputes the total from pair
// inner products).
AdvantageReport copywise_advantage(const StateEnsemble &ens, const MeasurementPlan &plan, int D, int k,
                                   const Options &opt = {});

struct CopyMomentResult {
    double value = 0.0;
    bool exact = false;
    std::size_t samples = 0;
    double stderr_ = 0.0;
    double bound = 0.0;
    double epsilon = 0.0;
};
// E_{rho,rho'}(<Dbar_rho, Dbar_rho'> - 1)^k for one measurement, with the
// bound C k^2 k^k (epsilon + 1/D).
CopyMomentResult copy_moment_statistic(const StateEnsemble &ens, const Matrix &rotation, int k, const Options &opt = {},
                                       double epsilon = 0.0, double C = 1.0);

// E_{rho,rho'} (g^{<=D})^t with g the truncated inner product minus one,
// for one measurement; exact over finite support, Monte Carlo otherwise.
double truncated_pair_moment(const StateEnsemble &ens, int ancilla, const Matrix &rotation, int D, int t,
                             bool absolute, const Options &opt);

enum class Structure { within_block, among_block };

// Round-based learning tree over m1 blocks of m0 copies. choose(copy, history)
// returns an index into `library`; history holds the outcomes of all earlier
// copies. Within-block trees may only look at outcomes of the same block,
// among-block trees only at outcomes of earlier blocks.
struct AdaptiveTree {
    Structure structure = Structure::within_block;
    int m1 = 1;
    int m0 = 1;
    QuditRegister system;
    std::vector<Matrix> library;  // unitaries on the system (no ancilla)
    std::function<std::size_t(int, const std::vector<std::size_t> &)> choose;

    int m() const { return m1 * m0; }
};

AdaptiveTree degenerate_tree(const MeasurementPlan &plan, Structure s, int m1, int m0);

// Variant A projects the exact joint likelihood ratio; variant B first
// truncates each conditional per-copy ratio and multiplies. Extras:
// "variant_b_total", "variant_difference", "bound", "bound_epsilon", "M",
// "bound_holds".
AdvantageReport adaptive_tree_advantage(const StateEnsemble &ens, const AdaptiveTree &tree, int D, int k,
                                        const Options &opt = {});

double within_block_bound(int k, int m1, int m0, double epsilon);
double among_block_bound(int k, int m1, int m0, double epsilon);

// k-LLR over position sets of size <= k and local qubit bases.
struct KllrResult {
    double value = 0.0;  // lower bound on the true maximum
    std::vector<Position> witness;
    std::vector<Matrix> witness_bases;
    double indistinguishability = 0.0;
    double bound = 0.0;  // eps^2 4^k
    bool lower_bound = true;
};
KllrResult kllr(const StateEnsemble &ens, int m, int k, const Options &opt = {}, int refine_rounds = 3);
// ||E_rho L_T - 1||^2 for the reduced state on T measured in product bases.
double reduced_llr(const Matrix &reduced, const std::vector<Matrix> &bases);
// The 26 grid directions used by kllr, as qubit bases.
std::vector<Matrix> bloch_grid();
Matrix bloch_basis(double theta, double phi);

// Backward light cone of t output sites through a depth-L circuit of
// nearest-neighbour gates in `geometry_dim` dimensions, capped at n.
int light_cone_size(int depth, int geometry_dim, int t, int n);

// local-llr: degree-k advantage of a local plan against eps^2 k (mn)^k.
// design-local: rotated local indistinguishability against the 2-design bound.
// copywise: degree-(D,k) advantage against k m^k eps.
// within-block / among-block: adaptive-tree advantage against the tree bounds.
enum class AuditKind { local_llr, design_local, copywise, within_block, among_block };
AuditKind audit_kind_from_string(const std::string &s);
std::string audit_kind_name(AuditKind k);

struct AuditInstance {
    const StateEnsemble *ensemble = nullptr;
    MeasurementPlan plan;
    const AdaptiveTree *tree = nullptr;
    int k = 1;
    int D = 1;
    std::vector<Position> T;  // design-local
    double epsilon = 0.0;     // design epsilon for design-local
    Options options;
};

struct AuditResult {
    AuditKind kind = AuditKind::local_llr;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
    std::string detail;
};

AuditResult bound_audit(AuditKind kind, const AuditInstance &inst);

}  // namespace qld::lowdeg
