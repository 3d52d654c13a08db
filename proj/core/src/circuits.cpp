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

#include "qld/ensembles.hpp"
#include "qld/haar.hpp"

namespace qld::ens {

CircuitSpec make_circuit_layout(int n, int depth, Architecture arch, int block) {
    if (n < 2 || n % 2) throw std::invalid_argument("circuit: n must be even and >= 2");
    if (n > 12) throw ResourceError("circuit: n must be <= 12");
    if (depth < 0) throw std::invalid_argument("circuit: negative depth");
    CircuitSpec c;
    c.n = n;
    c.depth = depth;
    c.arch = arch;
    c.block = arch == Architecture::brickwork ? 2 : block;
    if (arch == Architecture::coarse_grained) {
        if (block < 2 || block % 2 || n % block)
            throw std::invalid_argument("circuit: coarse-grained block size must be even and divide n");
    }
    const int b = c.block;
    for (int layer = 0; layer < depth; ++layer) {
        std::vector<Gate> gates;
        // Even layers start at site 0; odd layers are shifted by half a block
        // with periodic wrap-around.
        const int offset = (layer % 2) ? b / 2 : 0;
        for (int start = 0; start < n; start += b) {
            Gate g;
            for (int j = 0; j < b; ++j) g.sites.push_back((start + offset + j) % n);
            gates.push_back(std::move(g));
        }
        c.layers.push_back(std::move(gates));
    }
    return c;
}

CircuitSpec sample_circuit(const CircuitSpec &layout, Rng &rng) {
    CircuitSpec c = layout;
    for (auto &layer : c.layers)
        for (auto &g : layer) g.unitary = haar::haar_unitary(std::size_t(1) << g.sites.size(), rng);
    return c;
}

void apply_circuit(const CircuitSpec &circuit, Vector &psi) {
    QuditRegister reg = QuditRegister::uniform(circuit.n, 2);
    for (const auto &layer : circuit.layers)
        for (const auto &g : layer) {
            if (g.unitary.size() == 0) throw std::invalid_argument("apply_circuit: layout has no sampled gates");
            apply_gate(psi, reg, g.unitary, g.sites);
        }
}

Matrix circuit_unitary(const CircuitSpec &circuit) {
    const std::size_t dim = std::size_t(1) << circuit.n;
    check_dimension(dim, "circuit_unitary");
    Matrix u(dim, dim);
    for (std::size_t x = 0; x < dim; ++x) {
        Vector v = Vector::Zero(dim);
        v(x) = 1.0;
        apply_circuit(circuit, v);
        u.col(x) = v;
    }
    return u;
}

PureState sample_brickwork(const CircuitSpec &layout, Rng &rng) {
    CircuitSpec c = sample_circuit(layout, rng);
    QuditRegister reg = QuditRegister::uniform(c.n, 2);
    Vector v = Vector::Zero(reg.total_dim());
    v(0) = 1.0;
    apply_circuit(c, v);
    return PureState(reg, v);
}

StateEnsemble make_circuit_ensemble(int n, int depth, Architecture arch, int block) {
    CircuitSpec layout = make_circuit_layout(n, depth, arch, block);
    QuditRegister reg = QuditRegister::uniform(n, 2);
    StateEnsemble e;
    e.name = arch == Architecture::brickwork ? "brickwork" : "coarse";
    e.reg = reg;
    e.pure_sampler = [layout](Rng &rng) { return sample_brickwork(layout, rng).amp; };
    e.sampler = [layout, reg](Rng &rng) {
        Vector v = sample_brickwork(layout, rng).amp;
        return DensityOperator(reg, v * v.adjoint());
    };
    if (depth == 0) {
        e = make_point_ensemble(e.name, DensityOperator::from_pure(PureState::basis(reg, 0)));
    }
    e.parameters = {{"n", static_cast<double>(n)}, {"L", static_cast<double>(depth)},
                    {"block", static_cast<double>(layout.block)}};
    return e;
}

}  // namespace qld::ens
