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
#include "qld/qcore.hpp"

namespace qld::haar {

struct MomentOperator {
    int d = 0;
    int t = 0;
    Matrix matrix;
};

struct BetaCoefficient {
    long d = 0;
    long s = 0;
    Rational value;
};

struct GammaCoefficient {
    long d = 0;
    long t = 0;
    long f = 0;
    Rational value;
};

Vector haar_vector(std::size_t dim, Rng &rng);
PureState haar_sample(int d, Rng &rng);
PureState haar_sample(const QuditRegister &reg, Rng &rng);
// QR of a complex Ginibre matrix with the diagonal phase correction.
Matrix haar_unitary(std::size_t dim, Rng &rng);

// (1 / d(d+1)...(d+k-1)) * sum over S_k of P_pi.
MomentOperator moment_operator(int d, int k);
// Exact trace of moment_operator(d, k): sum_pi d^{cycles} / rising factorial.
Rational moment_trace_exact(int d, int k);

Rational mixed_overlap_moment(int d, const std::vector<int> &partition);

BetaCoefficient beta(long d, long s);
Rational beta_series_coefficient(long s, long a);
// 1 + sum_{a <= terms} c_a(s) d^{-a}
Rational beta_series_partial(long d, long s, long terms);

GammaCoefficient gamma(long d, long t, long f);
// sum over pi in S_t of gamma_{fix(pi)} P_pi.
MomentOperator centered_moment_operator(int d, int t);
// sum over U subset [t] of (-1)^{t-|U|} beta_{d,|U|} sum over pi in S_U of P_pi.
MomentOperator centered_moment_operator_beta_form(int d, int t);
// |gamma_f| <= (C t / sqrt(d))^f, evaluated with exact rationals (squared form).
bool gamma_bound_holds(long d, long t, long f, long C);

struct DerangementCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};
// bases[w] is the d x d unitary whose columns are the measurement vectors at
// position w; perm must have no fixed point.
DerangementCheck derangement_overlap_bound_check(int d, const std::vector<Matrix> &bases,
                                                 const std::vector<int> &perm);

Integer bell_number(int n);
Integer stirling2(int n, int k);
// All set partitions of {0..n-1}, each given as block labels (restricted growth strings).
std::vector<std::vector<int>> set_partitions(int n);

// Exact Haar value of E_{rho,rho'} <Dbar_rho, Dbar_rho'>^j for a basis of a
// D-dimensional space: D^j / (D...(D+j-1))^2 * sum over outcome lists of
// prod_y (#y)!^2.
Rational haar_pair_overlap_power(long D, int j);
// Exact Haar value of E_{rho,rho'} (<Dbar_rho, Dbar_rho'> - 1)^k.
Rational haar_copy_moment(long D, int k);

}  // namespace qld::haar
