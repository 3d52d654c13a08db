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

#include <cstdint>
#include <vector>

#include "qld/lowdeg.hpp"

namespace qld::lowdeg::detail {

// Flat digit index of the exponents of `index` restricted to one copy.
std::size_t copy_alpha(const FourierIndex &index, int copy, int sites, int d);
// Number of nonzero radix-d digits of each flat index in [0, d^digits).
std::vector<int> digit_weights(int d, int digits);
// Transform of one copy's outcome distribution.
std::vector<cplx> copy_hat(const std::vector<double> &dist, int d, int sites);
// Sample a pure or mixed state and return its outcome distribution on every copy.
std::vector<std::vector<double>> sampled_distributions(const StateEnsemble &ens, const MeasurementPlan &plan, Rng &rng);
// Per-copy distributions of a fixed state.
std::vector<std::vector<double>> state_distributions(const Matrix &rho, const MeasurementPlan &plan);

class CoefficientEngine {
  public:
    CoefficientEngine(const StateEnsemble &ens, const MeasurementPlan &plan, const Options &opt, int max_copies);
    // Precomputes whatever the chosen method needs for these indices.
    void prepare(const std::vector<FourierIndex> &indices);
    cplx coefficient(const FourierIndex &index) const;
    // Monte Carlo variance of the coefficient estimate (0 for exact methods).
    double variance(const FourierIndex &index) const;
    Method method() const { return method_; }
    std::size_t samples() const { return sample_hats_.size(); }

  private:
    std::uint64_t mask_of(const FourierIndex &index) const;

    const StateEnsemble &ens_;
    const MeasurementPlan &plan_;
    Options opt_;
    Method method_;
    int N_;
    int d_;
    std::size_t Dfull_;
    std::vector<std::vector<cplx>> null_hat_;
    std::vector<cplx> full_hat_;
    std::vector<std::uint64_t> masks_;
    std::vector<std::vector<cplx>> mask_hat_;
    std::vector<std::vector<std::vector<cplx>>> sample_hats_;
};

// Fills the table in index order and sums it graded by index size.
AdvantageReport assemble(const std::vector<FourierIndex> &indices, const CoefficientEngine &engine, int threads);

// Full averaged outcome distribution over all m copies (enumeration oracle).
std::vector<double> joint_distribution(const StateEnsemble &ens, const MeasurementPlan &plan);

}  // namespace qld::lowdeg::detail
