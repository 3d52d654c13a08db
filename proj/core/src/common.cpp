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

#include "qld/common.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <thread>

namespace qld {

namespace {
std::atomic<std::size_t> g_cap{4096};
std::atomic<bool> g_checks{false};
}  // namespace

std::size_t dimension_cap() { return g_cap.load(); }
void set_dimension_cap(std::size_t cap) { g_cap.store(cap); }

void check_dimension(std::size_t dim, const char *what) {
    if (dim > dimension_cap()) {
        throw ResourceError(std::string(what) + ": dimension " + std::to_string(dim) + " exceeds cap " +
                            std::to_string(dimension_cap()));
    }
}

bool invariant_checks() { return g_checks.load(); }
void set_invariant_checks(bool on) { g_checks.store(on); }

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)> &body) {
    if (count == 0) return;
    std::size_t workers = std::clamp<std::size_t>(threads < 1 ? 1 : threads, 1, count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                std::size_t lo = w * chunk;
                std::size_t hi = std::min(count, lo + chunk);
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) t.join();
    for (auto &e : errors)
        if (e) std::rethrow_exception(e);
}

Integer factorial(unsigned long n) {
    Integer r;
    mpz_fac_ui(r.get_mpz_t(), n);
    return r;
}

Integer binomial(unsigned long n, unsigned long k) {
    Integer r;
    mpz_bin_uiui(r.get_mpz_t(), n, k);
    return r;
}

double binomial_double(long n, long k) {
    if (k < 0 || k > n) return 0.0;
    return binomial(n, k).get_d();
}

Integer rising_factorial(unsigned long d, unsigned long k) {
    Integer r = 1;
    for (unsigned long j = 0; j < k; ++j) r *= d + j;
    return r;
}

double to_double(const Rational &q) { return q.get_d(); }

std::vector<std::vector<int>> all_permutations(int t) {
    std::vector<int> p(t);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<int>> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

int count_cycles(const std::vector<int> &perm) {
    std::vector<char> seen(perm.size(), 0);
    int cycles = 0;
    for (std::size_t a = 0; a < perm.size(); ++a) {
        if (seen[a]) continue;
        ++cycles;
        for (std::size_t b = a; !seen[b]; b = perm[b]) seen[b] = 1;
    }
    return cycles;
}

int count_fixed_points(const std::vector<int> &perm) {
    int f = 0;
    for (std::size_t a = 0; a < perm.size(); ++a) f += perm[a] == static_cast<int>(a);
    return f;
}

std::vector<std::vector<int>> combinations(int n, int k) {
    std::vector<std::vector<int>> out;
    if (k < 0 || k > n) return out;
    std::vector<int> c(k);
    std::iota(c.begin(), c.end(), 0);
    while (true) {
        out.push_back(c);
        int i = k - 1;
        while (i >= 0 && c[i] == n - k + i) --i;
        if (i < 0) break;
        ++c[i];
        for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
    }
    return out;
}

long ipow(long base, int exp) {
    long r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

}  // namespace qld
