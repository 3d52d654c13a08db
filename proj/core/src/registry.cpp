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

#include "qld/registry.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdlib>
#include <mutex>
#include <sstream>

#include "qld/haar.hpp"

namespace qld::registry {

namespace {

std::string trim(const std::string &s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

Descriptor parse_descriptor(const std::string &text) {
    Descriptor d;
    const std::string s = trim(text);
    if (s.empty()) throw DescriptorError("descriptor: empty name");
    const auto cut = s.find_first_of(":,");
    d.name = trim(s.substr(0, cut));
    if (d.name.empty()) throw DescriptorError("descriptor: empty name");
    if (cut == std::string::npos) return d;
    std::stringstream rest(s.substr(cut + 1));
    std::string tok;
    while (std::getline(rest, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) throw DescriptorError("descriptor '" + d.name + "': empty field");
        const auto eq = tok.find('=');
        if (eq == std::string::npos) {
            d.flags.insert(tok);
            continue;
        }
        std::string key = trim(tok.substr(0, eq)), value = trim(tok.substr(eq + 1));
        if (key.empty() || value.empty())
            throw DescriptorError("descriptor '" + d.name + "': field '" + tok + "' needs key=value");
        if (d.params.count(key)) throw DescriptorError("descriptor '" + d.name + "': field '" + key + "' repeated");
        d.params[key] = value;
    }
    if (!s.empty() && s.back() == ',') throw DescriptorError("descriptor '" + d.name + "': empty field");
    return d;
}

int Descriptor::get_int(const std::string &key, int fallback) const {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    errno = 0;
    char *end = nullptr;
    long v = std::strtol(it->second.c_str(), &end, 10);
    if (errno || *end || v < -1000000000L || v > 1000000000L)
        throw DescriptorError("descriptor '" + name + "': field '" + key + "' must be an integer");
    return static_cast<int>(v);
}

int Descriptor::require_int(const std::string &key) const {
    if (!has(key)) throw DescriptorError("descriptor '" + name + "': missing field '" + key + "'");
    return get_int(key, 0);
}

double Descriptor::get_double(const std::string &key, double fallback) const {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    errno = 0;
    char *end = nullptr;
    double v = std::strtod(it->second.c_str(), &end);
    if (errno || *end) throw DescriptorError("descriptor '" + name + "': field '" + key + "' must be a number");
    return v;
}

std::string Descriptor::get_string(const std::string &key, const std::string &fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void Descriptor::expect(const std::vector<std::string> &keys, const std::vector<std::string> &allowed_flags) const {
    for (const auto &[k, v] : params)
        if (std::find(keys.begin(), keys.end(), k) == keys.end())
            throw DescriptorError("descriptor '" + name + "': unknown field '" + k + "'");
    for (const auto &f : flags)
        if (std::find(allowed_flags.begin(), allowed_flags.end(), f) == allowed_flags.end())
            throw DescriptorError("descriptor '" + name + "': unknown field '" + f + "'");
}

namespace {

struct Tables {
    std::vector<EnsembleEntry> ensembles;
    std::vector<PlanEntry> plans;
};

int positive(const Descriptor &d, const std::string &key, int fallback) {
    int v = d.get_int(key, fallback);
    if (v < 1) throw DescriptorError("descriptor '" + d.name + "': field '" + key + "' must be >= 1");
    return v;
}

ens::StateEnsemble make_point(const Descriptor &d) {
    d.expect({"n", "d"}, {"zero-state", "plus-state", "mixed"});
    const int n = positive(d, "n", 1), dim = d.get_int("d", 2);
    if (dim < 2) throw DescriptorError("descriptor 'point': field 'd' must be >= 2");
    if (d.flags.size() > 1) throw DescriptorError("descriptor 'point': choose one state flag");
    const auto reg = QuditRegister::uniform(n, dim);
    check_dimension(reg.total_dim(), "point ensemble");
    if (d.flag("mixed")) return ens::make_point_ensemble("point:mixed", DensityOperator::maximally_mixed(reg));
    if (d.flag("plus-state")) {
        const auto D = static_cast<Eigen::Index>(reg.total_dim());
        Vector v = Vector::Constant(D, 1.0 / std::sqrt(static_cast<double>(D)));
        return ens::make_point_ensemble("point:plus-state", DensityOperator::from_pure(PureState(reg, v)));
    }
    return ens::make_point_ensemble("point:zero-state", DensityOperator::from_pure(PureState::basis(reg, 0)));
}

ens::StateEnsemble make_biclique(const Descriptor &d) {
    d.expect({"n", "d", "lambda"});
    biclique::BicliqueInstance inst{positive(d, "n", 2), d.get_int("d", 2), d.get_double("lambda", 1.0), 1};
    try {
        inst.validate();
    } catch (const std::invalid_argument &e) {
        throw DescriptorError(std::string("descriptor 'biclique': ") + e.what());
    }
    const auto reg = QuditRegister::uniform(inst.n, inst.d);
    check_dimension(reg.total_dim(), "biclique ensemble");
    ens::StateEnsemble e;
    e.name = "biclique";
    e.reg = reg;
    e.sampler = [inst](Rng &rng) {
        auto s = biclique::sample_secret(inst, rng);
        return biclique::sample_copy(inst, s);
    };
    e.parameters = {{"n", inst.n}, {"d", inst.d}, {"lambda", inst.lambda}};
    return e;
}

Tables build_defaults() {
    Tables t;
    t.ensembles.push_back({"haar", "n=<sites, 1>,d=<local dim, 2>", [](const Descriptor &d) {
                               d.expect({"n", "d"});
                               int dim = d.get_int("d", 2);
                               if (dim < 2) throw DescriptorError("descriptor 'haar': field 'd' must be >= 2");
                               return ens::make_haar_ensemble(QuditRegister::uniform(positive(d, "n", 1), dim));
                           }});
    t.ensembles.push_back({"stabilizer", "n=<qubits, 1..6>", [](const Descriptor &d) {
                               d.expect({"n"});
                               return ens::make_stabilizer_ensemble(positive(d, "n", 1));
                           }});
    t.ensembles.push_back({"brickwork", "n=<even qubits>,L=<depth>", [](const Descriptor &d) {
                               d.expect({"n", "L"});
                               return ens::make_circuit_ensemble(positive(d, "n", 2), d.get_int("L", 1),
                                                                 ens::Architecture::brickwork);
                           }});
    t.ensembles.push_back({"coarse", "n=<even qubits>,L=<depth>,block=<even, divides n>", [](const Descriptor &d) {
                               d.expect({"n", "L", "block"});
                               return ens::make_circuit_ensemble(positive(d, "n", 4), d.get_int("L", 1),
                                                                 ens::Architecture::coarse_grained,
                                                                 d.get_int("block", 2));
                           }});
    t.ensembles.push_back({"gibbs-gue", "n=<qubits>,beta=<inverse temperature>", [](const Descriptor &d) {
                               d.expect({"n", "beta"});
                               return ens::make_gibbs_ensemble(ens::HamiltonianKind::gue, positive(d, "n", 1),
                                                               d.get_double("beta", 1.0));
                           }});
    t.ensembles.push_back({"gibbs-rsps", "n=<qubits>,beta=<inverse temperature>,J=<terms>", [](const Descriptor &d) {
                               d.expect({"n", "beta", "J"});
                               return ens::make_gibbs_ensemble(ens::HamiltonianKind::rsps, positive(d, "n", 1),
                                                               d.get_double("beta", 1.0), positive(d, "J", 4));
                           }});
    t.ensembles.push_back({"point", "zero-state|plus-state|mixed,n=<sites, 1>,d=<local dim, 2>", make_point});
    t.ensembles.push_back({"biclique", "n=<sites>,d=<local dim, 2>,lambda=<planted size>", make_biclique});

    t.plans.push_back({"comp-basis", "m=<copies, 1>", [](const QuditRegister &sys, const Descriptor &d, Rng &) {
                           d.expect({"m"});
                           return lowdeg::computational_plan(sys, positive(d, "m", 1));
                       }});
    t.plans.push_back({"random-local", "m=<copies, 1>", [](const QuditRegister &sys, const Descriptor &d, Rng &rng) {
                           d.expect({"m"});
                           return lowdeg::random_local_plan(sys, positive(d, "m", 1), rng);
                       }});
    t.plans.push_back(
        {"haar-global", "m=<copies, 1>,ancilla=<qubits, 0>", [](const QuditRegister &sys, const Descriptor &d, Rng &rng) {
             d.expect({"m", "ancilla"});
             const int m = positive(d, "m", 1), a = d.get_int("ancilla", 0);
             if (a < 0) throw DescriptorError("descriptor 'haar-global': field 'ancilla' must be >= 0");
             std::size_t dim = sys.total_dim();
             for (int i = 0; i < a; ++i) dim *= static_cast<std::size_t>(sys.uniform_dim());
             check_dimension(dim, "haar-global plan");
             std::vector<Matrix> rot;
             for (int i = 0; i < m; ++i) rot.push_back(haar::haar_unitary(dim, rng));
             return lowdeg::global_plan(sys, m, a, rot, "haar-global");
         }});
    return t;
}

std::mutex g_mutex;

Tables &tables() {
    static Tables t = build_defaults();
    return t;
}

}  // namespace

void register_ensemble(EnsembleEntry e) {
    std::lock_guard<std::mutex> lock(g_mutex);
    auto &v = tables().ensembles;
    v.erase(std::remove_if(v.begin(), v.end(), [&](const EnsembleEntry &x) { return x.name == e.name; }), v.end());
    v.push_back(std::move(e));
}

void register_plan(PlanEntry e) {
    std::lock_guard<std::mutex> lock(g_mutex);
    auto &v = tables().plans;
    v.erase(std::remove_if(v.begin(), v.end(), [&](const PlanEntry &x) { return x.name == e.name; }), v.end());
    v.push_back(std::move(e));
}

ens::StateEnsemble make_ensemble(const std::string &descriptor) {
    Descriptor d = parse_descriptor(descriptor);
    std::function<ens::StateEnsemble(const Descriptor &)> make;
    {
        std::lock_guard<std::mutex> lock(g_mutex);
        for (const auto &e : tables().ensembles)
            if (e.name == d.name) make = e.make;
    }
    if (!make) throw DescriptorError("unknown ensemble '" + d.name + "'");
    return make(d);
}

lowdeg::MeasurementPlan make_plan(const std::string &descriptor, const QuditRegister &system, Rng &rng) {
    Descriptor d = parse_descriptor(descriptor);
    std::function<lowdeg::MeasurementPlan(const QuditRegister &, const Descriptor &, Rng &)> make;
    {
        std::lock_guard<std::mutex> lock(g_mutex);
        for (const auto &e : tables().plans)
            if (e.name == d.name) make = e.make;
    }
    if (!make) throw DescriptorError("unknown plan '" + d.name + "'");
    return make(system, d, rng);
}

biclique::Detector make_detector(const std::string &descriptor) {
    Descriptor d = parse_descriptor(descriptor);
    d.expect({});
    try {
        return biclique::detector_from_string(d.name);
    } catch (const std::invalid_argument &) {
        throw DescriptorError("unknown detector '" + d.name + "'");
    }
}

std::vector<std::string> ensemble_names() {
    std::lock_guard<std::mutex> lock(g_mutex);
    std::vector<std::string> out;
    for (const auto &e : tables().ensembles) out.push_back(e.name);
    return out;
}

std::vector<std::string> plan_names() {
    std::lock_guard<std::mutex> lock(g_mutex);
    std::vector<std::string> out;
    for (const auto &e : tables().plans) out.push_back(e.name);
    return out;
}

std::string list_registry(const std::string &filter) {
    std::lock_guard<std::mutex> lock(g_mutex);
    std::ostringstream os;
    auto line = [&](const std::string &kind, const std::string &name, const std::string &schema) {
        if (!filter.empty() && name.find(filter) == std::string::npos && kind.find(filter) == std::string::npos) return;
        os << kind << ' ' << name << (schema.empty() ? "" : "  " + schema) << '\n';
    };
    for (const auto &e : tables().ensembles) line("ensemble", e.name, e.schema);
    for (const auto &p : tables().plans) line("plan", p.name, p.schema);
    for (auto det : {biclique::Detector::edge_count, biclique::Detector::subgraph_scan, biclique::Detector::swap})
        line("detector", biclique::detector_name(det), "");
    return os.str();
}

}  // namespace qld::registry
