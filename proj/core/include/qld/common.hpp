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

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <gmpxx.h>

namespace qld {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;
using Rational = mpq_class;
using Integer = mpz_class;

// Thrown when a requested object would exceed the configured dimension or
// enumeration budget.
class ResourceError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Upper bound on the side of any dense matrix the library will build.
std::size_t dimension_cap();
void set_dimension_cap(std::size_t cap);
void check_dimension(std::size_t dim, const char *what);

// When enabled, channels and traces re-validate their outputs.
bool invariant_checks();
void set_invariant_checks(bool on);

std::uint64_t splitmix64(std::uint64_t x);

class Rng {
  public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(splitmix64(seed)) {}

    // Independent child stream; the result depends only on (seed, key).
    Rng derive(std::uint64_t key) const { return Rng(splitmix64(seed_ ^ splitmix64(key + 0x632be59bd9b4e019ULL))); }
    Rng derive(std::uint64_t a, std::uint64_t b) const { return derive(a).derive(b); }

    std::uint64_t seed() const { return seed_; }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
    double normal() { return std::normal_distribution<double>(0.0, 1.0)(engine_); }
    bool bernoulli(double p) { return uniform() < p; }
    std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }
    cplx complex_normal() {
        double re = normal();
        double im = normal();
        return {re, im};
    }
    std::mt19937_64 &engine() { return engine_; }

  private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

// Runs body(i) for i in [0, count) on up to `threads` workers. Work is split
// into contiguous chunks, so any per-index output is independent of `threads`.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)> &body);

Integer factorial(unsigned long n);
Integer binomial(unsigned long n, unsigned long k);
double binomial_double(long n, long k);
// d (d+1) ... (d+k-1)
Integer rising_factorial(unsigned long d, unsigned long k);
double to_double(const Rational &q);

// All permutations of {0..t-1} in lexicographic order; perm[a] is the image of a.
std::vector<std::vector<int>> all_permutations(int t);
int count_cycles(const std::vector<int> &perm);
int count_fixed_points(const std::vector<int> &perm);
// All k-subsets of {0..n-1} in lexicographic order.
std::vector<std::vector<int>> combinations(int n, int k);

long ipow(long base, int exp);

}  // namespace qld
