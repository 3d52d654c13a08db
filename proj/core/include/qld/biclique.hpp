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
#include "qld/qcore.hpp"

namespace qld::biclique {

// n qudits of dimension d, m copies; kappa = lambda / n is both the chance that
// a site joins S and the chance that a copy keeps the planted layer.
struct BicliqueInstance {
    int n = 0;
    int d = 2;
    double lambda = 0.0;
    int m = 0;
    double kappa() const { return lambda / n; }
    void validate() const;
};

struct PlantedSecret {
    Vector rho;          // pure single-qudit state
    std::vector<int> S;  // sorted sites
};

PlantedSecret sample_secret(const BicliqueInstance &inst, Rng &rng);

// kappa * (rho on S, I/d elsewhere) + (1 - kappa) I/d^n.
DensityOperator sample_copy(const BicliqueInstance &inst, const PlantedSecret &secret);
// E_S sigma^{(x) t} through the expansion over copy subsets U and nonempty
// site sets T_l (each weighted by kappa^{|U|} kappa^{|union T_l|}).
Matrix expected_power(const BicliqueInstance &inst, const Vector &rho, int t);
// Same quantity by direct enumeration of all subsets S.
Matrix expected_power_direct(const BicliqueInstance &inst, const Vector &rho, int t);

// Per (copy, site) measurement basis; bases[copy * n + site], empty = computational.
struct LocalPlanGrid {
    int m = 0;
    int n = 0;
    int d = 2;
    std::vector<Matrix> bases;
    const Matrix *basis(int copy, int site) const;
    static LocalPlanGrid computational(int m, int n, int d);
    void validate() const;
};

// Outcome grid under the planted model, or under the null when secret is empty.
OutcomeRecord measure_grid(const BicliqueInstance &inst, const PlantedSecret *secret, const LocalPlanGrid &plan,
                           Rng &rng);
// Independent classical generator for rho = |1>, d = 2: planted rows carry ones on S.
OutcomeRecord classical_planted_biclique(int n, int m, double kappa, const std::vector<int> &S, Rng &rng);

struct DetectionResult {
    double statistic = 0.0;
    double threshold = 0.0;
    bool decision = false;  // true = planted
    double null_mean = 0.0;
    double null_var = 0.0;
    double alt_mean = 0.0;
    std::string rule;
};

// SWAP test on pairs (2j, 2j+1) of every copy.
double swap_null_mean(int d);
double swap_alt_mean(int d, double kappa);
double swap_null_variance(int n, int m, int d);
// Exact E_S E[Z^2] under the planted model.
double swap_second_moment(const BicliqueInstance &inst);
double swap_statistic(const std::vector<int> &accepts);
DetectionResult swap_protocol(const BicliqueInstance &inst, const PlantedSecret *secret, Rng &rng);

constexpr double kEdgeCountZ = 1.4;
DetectionResult edge_count_protocol(const BicliqueInstance &inst, const OutcomeRecord &grid, double z = kEdgeCountZ);

struct ScanCaps {
    int t = 6;        // copies
    int t_prime = 6;  // sites
    double constant = 0.0;  // 0 selects the calibrated default
};
double default_scan_constant();
DetectionResult subgraph_scan(const BicliqueInstance &inst, const OutcomeRecord &grid, const ScanCaps &caps = {});

enum class Detector { edge_count, subgraph_scan, swap };
Detector detector_from_string(const std::string &s);
std::string detector_name(Detector d);
// Reference operating point used to document each detector's threshold.
BicliqueInstance default_instance(Detector det);
DetectionResult run_detector(Detector det, const BicliqueInstance &inst, const PlantedSecret *secret, Rng &rng,
                             const ScanCaps &caps = {});
// Fraction of null trials flagged as planted.
double false_positive_rate(Detector det, const BicliqueInstance &inst, std::size_t trials, const Rng &rng,
                           int threads = 1, const ScanCaps &caps = {});

// Exact Fourier mass of position set W (pairs copy, site) for the given plan.
double fourier_mass(const BicliqueInstance &inst, const LocalPlanGrid &plan, const std::vector<std::pair<int, int>> &W);
struct MassEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};
// Monte Carlo oracle: kappa powers times the average of prod_w C_w over Haar pairs.
MassEstimate fourier_mass_mc(const BicliqueInstance &inst, const LocalPlanGrid &plan,
                             const std::vector<std::pair<int, int>> &W, std::size_t pairs, const Rng &rng,
                             int threads = 1);
double low_degree_mass_budget(const BicliqueInstance &inst, int k, double C = 1.0);

struct PhaseCell {
    int n = 0;
    int d = 2;
    double lambda = 0.0;
    int m = 0;
    std::string detector;
    std::size_t trials = 0;
    double power = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::uint64_t seed = 0;
};

struct WilsonInterval {
    double low = 0.0;
    double high = 0.0;
};
WilsonInterval wilson(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

struct PhaseGrid {
    std::vector<int> n;
    std::vector<int> d;
    std::vector<double> lambda;
    int m = 0;  // 0 means m = n
    Detector detector = Detector::edge_count;
    std::size_t trials = 0;
    ScanCaps caps;
};

std::vector<PhaseCell> phase_diagram(const PhaseGrid &grid, std::uint64_t seed, int threads = 1);
std::string phase_csv(const std::vector<PhaseCell> &cells);
// First crossing of power 1/2, interpolated linearly in log lambda; nullopt if none.
std::optional<double> crossover(const std::vector<PhaseCell> &cells);

}  // namespace qld::biclique
