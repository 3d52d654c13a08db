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

#include <vector>

#include "qld/common.hpp"
#include "qld/ensembles.hpp"
#include "qld/lowdeg.hpp"
#include "qld/qcore.hpp"

namespace qld::mitigation {

enum class InputKind { null_input, alternative };

// n qubits, unitary blocks U_1..U_l (each on 2^n), per-site depolarizing
// D_kappa(X) = (1 - kappa) X + kappa tr_i(X) (x) I/2 after the listed blocks.
struct NoisyCircuitSpec {
    int n = 0;
    std::vector<Matrix> blocks;
    double kappa = 0.0;
    std::vector<int> noise_after;  // block indices; empty = after every block
    InputKind input = InputKind::null_input;

    void validate() const;
    bool noisy_after(int block) const;
    // U_l ... U_1
    Matrix composite() const;
};

NoisyCircuitSpec haar_circuit(int n, int l, double kappa, Rng &rng);
std::vector<Matrix> blocks_from_circuits(const std::vector<ens::CircuitSpec> &circuits);

// I/2^n for the null, C^dagger |0><0| C for the alternative.
DensityOperator input_state(const NoisyCircuitSpec &spec);
// Validates the state after every layer and that no noise layer raises purity.
DensityOperator apply_noisy_circuit(const NoisyCircuitSpec &spec, const DensityOperator &input);

double purity_constant(double kappa);

struct PurityCheck {
    double mean = 0.0;
    double stderr_ = 0.0;
    double bound = 0.0;
    bool pass = false;
};
// Haar blocks on 2^n acting on |0...0>.
PurityCheck purity_decay_check(int n, int l, double kappa, std::size_t trials, const Rng &rng, int threads = 1);

// 2^{a-n} [c^{nl} (1 - 2^{-n}) + l eps] + eps_star
double r_bound(int a, int n, int l, double kappa, double eps = 0.0, double eps_star = 0.0);
// E tr(rho_A^2) - 2^{-|A|} after one Haar block, given the purity before it.
double haar_marginal_deviation(int n, int a, double purity);

struct ReducedStateAudit {
    std::vector<double> distances;  // ||tr_{not A} rho - I/2^|A|||_1 per trial
    double R = 0.0;
    double threshold = 0.0;  // 2^{|A|/2} R^{1/4}
    double exceedance = 0.0;
    double stderr_ = 0.0;
    double predicted = 0.0;  // R^{1/2}
    bool tail_pass = false;
    // Last-block check of the Haar recursion for the marginal deviation.
    double recursion_empirical = 0.0;
    double recursion_exact = 0.0;
    double recursion_stderr = 0.0;
    bool recursion_pass = false;
    bool recursion_le_bound = false;  // exact Haar factor <= 2^{|A|-n}
    bool pass = false;
};
ReducedStateAudit reduced_state_audit(int n, int l, double kappa, const std::vector<int> &A, std::size_t trials,
                                      const Rng &rng, int threads = 1);

struct HypothesisTest {
    lowdeg::AdvantageReport report;
    double normalized = 0.0;  // total / number of indices, in [0, 1] for d = 2
    double budget = 0.0;      // from the reduced-state tail bound
};
// Alternative ensemble: one noisy circuit per trial applied to C^dagger|0><0|C,
// compared against I/2^n with the given single-qubit plan.
HypothesisTest hypothesis_test_sim(int n, int l, double kappa, const lowdeg::MeasurementPlan &plan, int k,
                                   std::size_t trials, const Rng &rng, const lowdeg::Options &opt = {});

}  // namespace qld::mitigation
