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

#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "qld/biclique.hpp"
#include "qld/ensembles.hpp"
#include "qld/haar.hpp"
#include "qld/lowdeg.hpp"
#include "qld/mitigation.hpp"
#include "qld/registry.hpp"

namespace qld::cli {

namespace {

using nlohmann::json;

// Raised for configuration mistakes that CLI11 cannot see (exit 1).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Artifact {
    std::string body;
    std::string summary;
    std::vector<std::string> failures;
};

struct Common {
    std::string config;
    std::string out;
    std::string format;
    std::uint64_t seed = 0;
    int threads = 1;
};

json num(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

std::string g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string g17(double v) {
    if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep))
        if (!tok.empty()) out.push_back(tok);
    return out;
}

template <class T>
std::vector<T> parse_list(const std::string &field, const std::string &s) {
    std::vector<T> out;
    for (const auto &tok : split(s, ',')) {
        std::size_t used = 0;
        try {
            if constexpr (std::is_same_v<T, int>)
                out.push_back(std::stoi(tok, &used));
            else
                out.push_back(std::stod(tok, &used));
        } catch (const std::exception &) {
            used = 0;
        }
        if (used != tok.size()) throw ConfigError("field '" + field + "': cannot parse '" + tok + "'");
    }
    if (out.empty()) throw ConfigError("field '" + field + "' is empty");
    return out;
}

CLI::Option *last(CLI::Option *o) { return o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast); }

void add_common(CLI::App *sub, Common &c, bool needs_seed) {
    last(sub->add_option("--config", c.config, "JSON file whose fields fill unset options"));
    last(sub->add_option("--out", c.out, "output path (stdout when absent)"));
    last(sub->add_option("--format", c.format, "csv or json"))->check(CLI::IsMember({"csv", "json"}));
    last(sub->add_option("--threads", c.threads, "worker threads; never changes results"))->check(CLI::Range(1, 1024));
    if (needs_seed) last(sub->add_option("--seed", c.seed, "root seed (required)"));
}

lowdeg::Method method_from(const std::string &mode) {
    if (mode == "auto") return lowdeg::Method::automatic;
    if (mode == "exact" || mode == "moment") return lowdeg::Method::moment;
    if (mode == "enumeration") return lowdeg::Method::enumeration;
    if (mode == "mc") return lowdeg::Method::monte_carlo;
    throw ConfigError("field 'mode': expected auto, exact, moment, enumeration or mc");
}

json report_json(const lowdeg::AdvantageReport &r) {
    json j;
    j["k"] = r.k;
    j["D"] = r.D;
    j["method"] = r.method;
    j["total"] = num(r.total);
    j["samples"] = r.samples;
    j["stderr"] = num(r.stderr_);
    json ex = json::object();
    for (const auto &[k, v] : r.extras) ex[k] = num(v);
    j["extras"] = ex;
    json rows = json::array();
    for (const auto &e : r.table) {
        json pos = json::array();
        for (const auto &p : e.index.positions) pos.push_back({p.copy, p.site});
        rows.push_back({{"positions", pos},
                        {"exponents", e.index.exponents},
                        {"re", num(e.value.real())},
                        {"im", num(e.value.imag())},
                        {"sq", num(e.value_sq)}});
    }
    j["table"] = rows;
    return j;
}

std::string report_csv(const lowdeg::AdvantageReport &r) {
    std::ostringstream os;
    os << "positions,exponents,re,im,sq\n";
    for (const auto &e : r.table) {
        std::string pos, ex;
        for (std::size_t i = 0; i < e.index.positions.size(); ++i) {
            if (i) {
                pos += ';';
                ex += ';';
            }
            pos += std::to_string(e.index.positions[i].copy) + "." + std::to_string(e.index.positions[i].site);
            ex += std::to_string(e.index.exponents[i]);
        }
        os << pos << ',' << ex << ',' << g17(e.value.real()) << ',' << g17(e.value.imag()) << ',' << g17(e.value_sq)
           << '\n';
    }
    return os.str();
}

std::vector<ens::Position> parse_positions(const std::string &s) {
    std::vector<ens::Position> out;
    for (const auto &tok : split(s, ';')) {
        auto parts = split(tok, '.');
        if (parts.size() != 2) throw ConfigError("field 'T': positions are copy.site separated by ';'");
        auto v = parse_list<int>("T", parts[0] + "," + parts[1]);
        out.push_back({v[0], v[1]});
    }
    return out;
}

// ---------------------------------------------------------------- advantage
struct AdvantageArgs {
    std::string ensemble;
    std::string plan = "comp-basis,m=1";
    int k = 1;
    int D = -1;
    std::string mode = "auto";
    std::size_t samples = 10000;
    double budget = 1e6;
    std::string audit;
    int m1 = 1, m0 = 1;
    std::string T;
    double epsilon = 0.0;
};

Artifact run_advantage(const AdvantageArgs &a, const Common &c) {
    auto ensemble = registry::make_ensemble(a.ensemble);
    Rng root(c.seed);
    Rng plan_rng = root.derive(1);
    auto plan = registry::make_plan(a.plan, ensemble.reg, plan_rng);
    lowdeg::Options opt;
    opt.method = method_from(a.mode);
    opt.samples = a.samples;
    opt.seed = root.derive(2).seed();
    opt.threads = c.threads;
    if (!(a.budget >= 1)) throw ConfigError("field 'budget' must be >= 1");
    opt.budget = static_cast<std::size_t>(a.budget);
    if (a.k < 0) throw ConfigError("field 'k' must be >= 0");
    auto rep = a.D >= 0 ? lowdeg::copywise_advantage(ensemble, plan, a.D, a.k, opt)
                        : lowdeg::degree_advantage(ensemble, plan, a.k, opt);
    json j;
    j["command"] = "advantage";
    j["ensemble"] = a.ensemble;
    j["plan"] = a.plan;
    j["seed"] = c.seed;
    j["report"] = report_json(rep);
    Artifact art;
    if (!a.audit.empty()) {
        lowdeg::AuditInstance inst;
        inst.ensemble = &ensemble;
        inst.plan = plan;
        inst.k = a.k;
        inst.D = a.D >= 0 ? a.D : 1;
        inst.T = parse_positions(a.T);
        inst.epsilon = a.epsilon;
        inst.options = opt;
        auto kind = lowdeg::audit_kind_from_string(a.audit);
        lowdeg::AdaptiveTree tree;
        if (kind == lowdeg::AuditKind::within_block || kind == lowdeg::AuditKind::among_block) {
            if (a.m1 * a.m0 != plan.m) throw ConfigError("field 'm1' * 'm0' must equal the plan's copy count");
            tree = lowdeg::degenerate_tree(plan, lowdeg::Structure::within_block, a.m1, a.m0);
            inst.tree = &tree;
        }
        auto res = lowdeg::bound_audit(kind, inst);
        j["audit"] = {{"kind", lowdeg::audit_kind_name(res.kind)},
                      {"lhs", num(res.lhs)},
                      {"rhs", num(res.rhs)},
                      {"pass", res.pass},
                      {"detail", res.detail}};
        if (!res.pass)
            art.failures.push_back("audit " + lowdeg::audit_kind_name(res.kind) + " failed: lhs " + g6(res.lhs) +
                                   " > rhs " + g6(res.rhs));
    }
    art.body = c.format == "csv" ? report_csv(rep) : j.dump(2) + "\n";
    art.summary = "advantage total=" + g6(rep.total) + " k=" + std::to_string(a.k) + " method=" + rep.method;
    return art;
}

// ------------------------------------------------------------- design-check
struct DesignArgs {
    std::string ensemble;
    int k = 2;
    std::string mode = "exact";
    std::size_t samples = 10000;
};

Artifact run_design(const DesignArgs &a, const Common &c) {
    auto ensemble = registry::make_ensemble(a.ensemble);
    if (a.mode != "exact" && a.mode != "mc") throw ConfigError("field 'mode': expected exact or mc");
    Rng rng(c.seed);
    auto r = ens::design_certify(ensemble, a.k, a.mode == "exact" ? ens::DesignMode::exact : ens::DesignMode::monte_carlo,
                                 a.samples, rng, c.threads);
    Artifact art;
    if (c.format == "csv") {
        std::ostringstream os;
        os << "ensemble,k,epsilon,exact,samples,sym_dim,lambda_min,lambda_max,singular,non_psd_noise,sampling_error\n";
        os << a.ensemble.substr(0, a.ensemble.find_first_of(":,")) << ',' << r.k << ',' << g17(r.epsilon) << ','
           << r.exact << ',' << r.samples << ',' << r.sym_dim << ',' << g17(r.lambda_min) << ',' << g17(r.lambda_max)
           << ',' << r.singular << ',' << r.non_psd_noise << ',' << g17(r.sampling_error) << '\n';
        art.body = os.str();
    } else {
        json j{{"command", "design-check"},
               {"ensemble", a.ensemble},
               {"seed", c.seed},
               {"k", r.k},
               {"epsilon", num(r.epsilon)},
               {"exact", r.exact},
               {"samples", r.samples},
               {"sym_dim", r.sym_dim},
               {"lambda_min", num(r.lambda_min)},
               {"lambda_max", num(r.lambda_max)},
               {"singular", r.singular},
               {"non_psd_noise", r.non_psd_noise},
               {"sampling_error", num(r.sampling_error)}};
        art.body = j.dump(2) + "\n";
    }
    art.summary = "design-check epsilon=" + g6(r.epsilon) + " k=" + std::to_string(a.k);
    return art;
}

// ----------------------------------------------------------- biclique-power
struct PowerArgs {
    std::string detector = "edge-count";
    std::string n = "64";
    std::string d = "2";
    std::string lambda = "4,8,16,32";
    int m = 0;
    std::size_t trials = 200;
    int t = 6, t_prime = 6;
    double scan_constant = 0.0;
};

Artifact run_power(const PowerArgs &a, const Common &c) {
    biclique::PhaseGrid grid;
    grid.detector = registry::make_detector(a.detector);
    grid.n = parse_list<int>("n", a.n);
    grid.d = parse_list<int>("d", a.d);
    grid.lambda = parse_list<double>("lambda", a.lambda);
    grid.m = a.m;
    grid.trials = a.trials;
    grid.caps = {a.t, a.t_prime, a.scan_constant};
    std::vector<biclique::PhaseCell> cells;
    if (a.trials > 0) cells = biclique::phase_diagram(grid, c.seed, c.threads);
    auto cross = biclique::crossover(cells);
    Artifact art;
    if (c.format == "csv") {
        art.body = biclique::phase_csv(cells);
    } else {
        json rows = json::array();
        for (const auto &p : cells)
            rows.push_back({{"n", p.n},
                            {"d", p.d},
                            {"lambda", p.lambda},
                            {"m", p.m},
                            {"detector", p.detector},
                            {"trials", p.trials},
                            {"power", p.power},
                            {"ci_low", p.ci_low},
                            {"ci_high", p.ci_high},
                            {"seed", p.seed}});
        json j{{"command", "biclique-power"}, {"seed", c.seed}, {"cells", rows}};
        j["crossover"] = cross ? json(*cross) : json(nullptr);
        art.body = j.dump(2) + "\n";
    }
    art.summary = "biclique-power cells=" + std::to_string(cells.size()) +
                  " crossover=" + (cross ? g6(*cross) : std::string("none"));
    return art;
}

// ------------------------------------------------------------ biclique-mass
struct MassArgs {
    int n = 2, d = 2, m = 0;
    double lambda = 1.0;
    int max_size = 2;
    std::string plan = "comp-basis";
    double C = 8.0;
};

Artifact run_mass(const MassArgs &a, const Common &c) {
    biclique::BicliqueInstance inst{a.n, a.d, a.lambda, a.m > 0 ? a.m : a.n};
    inst.validate();
    if (a.max_size < 1) throw ConfigError("field 'max-size' must be >= 1");
    if (a.max_size > 5) throw ResourceError("biclique-mass: max-size above 5");
    auto plan = biclique::LocalPlanGrid::computational(inst.m, inst.n, inst.d);
    if (a.plan == "random-local") {
        Rng rng(c.seed);
        for (int i = 0; i < inst.m * inst.n; ++i) plan.bases.push_back(haar::haar_unitary(inst.d, rng));
    } else if (a.plan != "comp-basis") {
        throw ConfigError("field 'plan': expected comp-basis or random-local");
    }
    const int positions = inst.m * inst.n;
    std::vector<std::vector<int>> sets;
    double count = 0;
    for (int s = 1; s <= std::min(a.max_size, positions); ++s) count += binomial_double(positions, s);
    if (count > 2e5) throw ResourceError("biclique-mass: too many position sets");
    for (int s = 1; s <= std::min(a.max_size, positions); ++s)
        for (auto &w : combinations(positions, s)) sets.push_back(w);
    std::vector<double> mu(sets.size());
    parallel_for(sets.size(), c.threads, [&](std::size_t i) {
        std::vector<std::pair<int, int>> W;
        for (int p : sets[i]) W.push_back({p / inst.n, p % inst.n});
        mu[i] = biclique::fourier_mass(inst, plan, W);
    });
    double total = 0.0;
    for (double v : mu) total += v;
    const double budget = biclique::low_degree_mass_budget(inst, a.max_size, a.C);
    auto label = [&](const std::vector<int> &w) {
        std::string s;
        for (std::size_t i = 0; i < w.size(); ++i)
            s += (i ? ";" : "") + std::to_string(w[i] / inst.n) + "." + std::to_string(w[i] % inst.n);
        return s;
    };
    Artifact art;
    if (c.format == "csv") {
        std::ostringstream os;
        os << "W,size,mu\n";
        for (std::size_t i = 0; i < sets.size(); ++i) os << label(sets[i]) << ',' << sets[i].size() << ',' << g17(mu[i]) << '\n';
        art.body = os.str();
    } else {
        json rows = json::array();
        for (std::size_t i = 0; i < sets.size(); ++i)
            rows.push_back({{"W", label(sets[i])}, {"size", sets[i].size()}, {"mu", num(mu[i])}});
        json j{{"command", "biclique-mass"}, {"seed", c.seed},  {"n", inst.n},          {"d", inst.d},
               {"m", inst.m},                {"lambda", a.lambda}, {"max_size", a.max_size}, {"rows", rows},
               {"total", num(total)},        {"budget", num(budget)}, {"C", a.C},          {"within_budget", total <= budget}};
        art.body = j.dump(2) + "\n";
    }
    art.summary = "biclique-mass total=" + g6(total) + " budget=" + g6(budget);
    return art;
}

// --------------------------------------------------------------- mitigation
struct MitigationArgs {
    int n = 4, l = 2;
    double kappa = 0.3;
    std::size_t trials = 200;
    std::string check = "all";
    std::string A = "0";
    int k = 1;
    std::string plan = "comp-basis,m=1";
};

Artifact run_mitigation(const MitigationArgs &a, const Common &c) {
    if (a.check != "all" && a.check != "purity" && a.check != "reduced" && a.check != "test")
        throw ConfigError("field 'check': expected all, purity, reduced or test");
    Rng root(c.seed);
    json j{{"command", "mitigation"}, {"seed", c.seed}, {"n", a.n}, {"l", a.l}, {"kappa", a.kappa}, {"trials", a.trials}};
    std::vector<std::pair<std::string, double>> flat;
    Artifact art;
    std::string headline;
    if (a.check == "all" || a.check == "purity") {
        auto p = mitigation::purity_decay_check(a.n, a.l, a.kappa, a.trials, root.derive(1), c.threads);
        j["purity"] = {{"mean", num(p.mean)}, {"stderr", num(p.stderr_)}, {"bound", num(p.bound)}, {"pass", p.pass}};
        flat.insert(flat.end(), {{"purity_mean", p.mean}, {"purity_stderr", p.stderr_}, {"purity_bound", p.bound},
                                 {"purity_pass", p.pass}});
        if (!p.pass)
            art.failures.push_back("purity check failed: mean " + g6(p.mean) + " > bound " + g6(p.bound) +
                                   " + 3 stderr " + g6(p.stderr_));
        headline = "purity=" + g6(p.mean) + " bound=" + g6(p.bound);
    }
    if (a.check == "all" || a.check == "reduced") {
        auto A = parse_list<int>("A", a.A);
        auto r = mitigation::reduced_state_audit(a.n, a.l, a.kappa, A, a.trials, root.derive(2), c.threads);
        j["reduced"] = {{"R", num(r.R)},
                        {"threshold", num(r.threshold)},
                        {"exceedance", num(r.exceedance)},
                        {"stderr", num(r.stderr_)},
                        {"predicted", num(r.predicted)},
                        {"recursion_empirical", num(r.recursion_empirical)},
                        {"recursion_stderr", num(r.recursion_stderr)},
                        {"pass", r.pass}};
        flat.insert(flat.end(), {{"R", r.R}, {"exceedance", r.exceedance}, {"exceedance_stderr", r.stderr_},
                                 {"predicted", r.predicted}, {"reduced_pass", r.pass}});
        if (!r.pass)
            art.failures.push_back("reduced-state audit failed: exceedance " + g6(r.exceedance) + " vs R^1/2 " +
                                   g6(r.predicted) + " (recursion deviation " + g6(r.recursion_empirical) + ")");
        if (headline.empty()) headline = "exceedance=" + g6(r.exceedance) + " R^1/2=" + g6(r.predicted);
    }
    if (a.check == "all" || a.check == "test") {
        Rng plan_rng = root.derive(3);
        auto plan = registry::make_plan(a.plan, QuditRegister::uniform(a.n, 2), plan_rng);
        lowdeg::Options opt;
        opt.threads = c.threads;
        opt.seed = root.derive(4).seed();
        auto h = mitigation::hypothesis_test_sim(a.n, a.l, a.kappa, plan, a.k, a.trials, root.derive(5), opt);
        j["test"] = {{"total", num(h.report.total)},
                     {"normalized", num(h.normalized)},
                     {"budget", num(h.budget)},
                     {"method", h.report.method},
                     {"indices", h.report.table.size()}};
        flat.insert(flat.end(), {{"advantage_total", h.report.total}, {"advantage_normalized", h.normalized},
                                 {"advantage_budget", h.budget}});
        if (headline.empty()) headline = "advantage=" + g6(h.normalized);
    }
    if (c.format == "csv") {
        std::ostringstream os;
        os << "quantity,value\n";
        for (const auto &[k, v] : flat) os << k << ',' << g17(v) << '\n';
        art.body = os.str();
    } else {
        art.body = j.dump(2) + "\n";
    }
    art.summary = "mitigation " + headline;
    return art;
}

// -------------------------------------------------------------- haar-verify
struct HaarArgs {
    std::size_t samples = 20000;
    int dmax = 3;
    int kmax = 3;
};

Artifact run_haar(const HaarArgs &a, const Common &c) {
    if (a.dmax < 2 || a.kmax < 1 || a.kmax > 4) throw ConfigError("field 'dmax' >= 2 and 1 <= 'kmax' <= 4 required");
    if (a.samples < 100) throw ConfigError("field 'samples' must be >= 100");
    struct Check {
        std::string name;
        double value;
        double tolerance;
        bool pass;
    };
    std::vector<Check> checks;
    Rng root(c.seed);
    const double mc_tol = 0.02 * std::sqrt(1e5 / static_cast<double>(a.samples));
    for (int d = 2; d <= a.dmax; ++d)
        for (int k = 1; k <= a.kmax; ++k) {
            const auto exact = haar::moment_operator(d, k).matrix;
            const std::size_t chunks = 64;
            std::vector<Matrix> part(chunks, Matrix::Zero(exact.rows(), exact.cols()));
            Rng stream = root.derive(static_cast<std::uint64_t>(d), static_cast<std::uint64_t>(k));
            parallel_for(chunks, c.threads, [&](std::size_t ch) {
                for (std::size_t s = a.samples * ch / chunks; s < a.samples * (ch + 1) / chunks; ++s) {
                    Rng r = stream.derive(s);
                    Vector v = haar::haar_vector(d, r), p = v;
                    for (int i = 1; i < k; ++i) p = kron(p, v);
                    part[ch] += p * p.adjoint();
                }
            });
            Matrix acc = Matrix::Zero(exact.rows(), exact.cols());
            for (const auto &p : part) acc += p;
            acc /= static_cast<double>(a.samples);
            double diff = max_abs(acc - exact);
            checks.push_back({"moment_mc d=" + std::to_string(d) + " k=" + std::to_string(k), diff, mc_tol, diff <= mc_tol});
            bool tr = haar::moment_trace_exact(d, k) == 1;
            checks.push_back({"moment_trace d=" + std::to_string(d) + " k=" + std::to_string(k), tr ? 1.0 : 0.0, 0.0, tr});
        }
    for (int d = 2; d <= a.dmax; ++d) {
        for (int t = 1; t <= 4; ++t) {
            double diff = max_abs(haar::centered_moment_operator(d, t).matrix -
                                  haar::centered_moment_operator_beta_form(d, t).matrix);
            checks.push_back(
                {"centered_forms d=" + std::to_string(d) + " t=" + std::to_string(t), diff, 1e-12, diff <= 1e-12});
        }
        const auto D = static_cast<Eigen::Index>(d * d);
        Matrix closed = static_cast<double>(d) * (Matrix::Identity(D, D) + permutation_operator(d, {1, 0})) / (d + 1.0) -
                        Matrix::Identity(D, D);
        double diff = max_abs(haar::centered_moment_operator(d, 2).matrix - closed);
        checks.push_back({"centered_t2_closed_form d=" + std::to_string(d), diff, 1e-12, diff <= 1e-12});
    }
    bool coeff_ok = true;
    for (long s = 0; s <= 6; ++s)
        for (long q = 1; q <= 4; ++q) {
            Rational v = haar::beta_series_coefficient(s, q);
            Integer bound;
            mpz_ui_pow_ui(bound.get_mpz_t(), 1 + s, 2 * q);
            if (abs(v) > Rational(bound)) coeff_ok = false;
        }
    checks.push_back({"beta_series_coefficients", coeff_ok ? 1.0 : 0.0, 0.0, coeff_ok});

    bool ok = true;
    for (const auto &ch : checks) ok = ok && ch.pass;
    Artifact art;
    for (const auto &ch : checks)
        if (!ch.pass) art.failures.push_back("haar-verify " + ch.name + ": " + g6(ch.value) + " > " + g6(ch.tolerance));
    if (c.format == "csv") {
        std::ostringstream os;
        os << "check,value,tolerance,pass\n";
        for (const auto &ch : checks) os << ch.name << ',' << g17(ch.value) << ',' << g17(ch.tolerance) << ',' << ch.pass << '\n';
        art.body = os.str();
    } else {
        json rows = json::array();
        for (const auto &ch : checks)
            rows.push_back({{"name", ch.name}, {"value", num(ch.value)}, {"tolerance", num(ch.tolerance)}, {"pass", ch.pass}});
        art.body = json{{"command", "haar-verify"}, {"seed", c.seed}, {"checks", rows}, {"pass", ok}}.dump(2) + "\n";
    }
    std::size_t passed = 0;
    for (const auto &ch : checks) passed += ch.pass;
    art.summary = "haar-verify passed=" + std::to_string(passed) + "/" + std::to_string(checks.size());
    return art;
}

// ------------------------------------------------------------------ helpers
void write_atomic(const std::string &path, const std::string &body) {
    namespace fs = std::filesystem;
    fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ConfigError("cannot open output '" + path + "'");
        f << body;
        f.flush();
        if (!f) throw ConfigError("cannot write output '" + path + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw ConfigError("cannot move output into place: " + ec.message());
    }
}

std::string value_token(const std::string &key, const json &v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    if (v.is_number_float()) return g17(v.get<double>());
    if (v.is_array()) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!(v[i].is_number() || v[i].is_string()))
                throw ConfigError("config field '" + key + "': list entries must be numbers or strings");
            s += (i ? "," : "") + value_token(key, v[i]);
        }
        return s;
    }
    throw ConfigError("config field '" + key + "': unsupported value type");
}

// Expands --config into argument tokens placed before the command-line ones,
// so explicit flags win.
std::vector<std::string> expand_config(const std::vector<std::string> &args, CLI::App &app) {
    if (args.size() < 2) return args;
    std::string path;
    for (std::size_t i = 2; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    CLI::App *sub = nullptr;
    try {
        sub = app.get_subcommand(args[1]);
    } catch (const CLI::OptionNotFound &) {
        return args;
    }
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config '" + path + "'");
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    json cfg;
    try {
        cfg = json::parse(text);
    } catch (const json::parse_error &e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config '" + path + "' line " + std::to_string(line) + " column " + std::to_string(col) +
                          ": " + e.what());
    }
    if (!cfg.is_object()) throw ConfigError("config '" + path + "': top level must be an object");
    std::vector<std::string> out(args.begin(), args.begin() + 2);
    for (const auto &[key, v] : cfg.items()) {
        if (key == "command") {
            if (!v.is_string() || v.get<std::string>() != args[1])
                throw ConfigError("config field 'command' does not match '" + args[1] + "'");
            continue;
        }
        if (key == "config") throw ConfigError("config field 'config' is not allowed");
        auto *opt = sub->get_option_no_throw("--" + key);
        if (!opt) throw ConfigError("config field '" + key + "' is not an option of '" + args[1] + "'");
        if (v.is_boolean()) {
            if (v.get<bool>()) out.push_back("--" + key);
            continue;
        }
        if (v.is_null()) continue;
        out.push_back("--" + key);
        out.push_back(value_token(key, v));
    }
    out.insert(out.end(), args.begin() + 2, args.end());
    return out;
}

}  // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
    CLI::App app{"qldlab: low-degree hardness experiments"};
    app.require_subcommand(1);

    Common common;
    AdvantageArgs adv;
    DesignArgs des;
    PowerArgs pow;
    MassArgs mass;
    MitigationArgs mit;
    HaarArgs haar_args;
    std::string filter;

    auto *s_adv = app.add_subcommand("advantage", "degree-k or copy-wise advantage of a measurement plan");
    add_common(s_adv, common, true);
    last(s_adv->add_option("--ensemble", adv.ensemble, "ensemble descriptor"));
    last(s_adv->add_option("--plan", adv.plan, "plan descriptor"));
    last(s_adv->add_option("--k", adv.k, "degree"));
    last(s_adv->add_option("--D", adv.D, "per-copy degree; enables the copy-wise report"));
    last(s_adv->add_option("--mode", adv.mode, "auto, exact, moment, enumeration or mc"));
    last(s_adv->add_option("--samples", adv.samples, "Monte Carlo samples"));
    last(s_adv->add_option("--budget", adv.budget, "index enumeration budget"));
    last(s_adv->add_option("--audit", adv.audit, "local-llr, design-local, copywise, within-block, among-block"));
    last(s_adv->add_option("--m1", adv.m1, "blocks for tree audits"));
    last(s_adv->add_option("--m0", adv.m0, "copies per block for tree audits"));
    last(s_adv->add_option("--T", adv.T, "positions copy.site;copy.site for design-local"));
    last(s_adv->add_option("--epsilon", adv.epsilon, "design epsilon for design-local"));

    auto *s_des = app.add_subcommand("design-check", "certify an ensemble as an approximate state k-design");
    add_common(s_des, common, true);
    last(s_des->add_option("--ensemble", des.ensemble, "ensemble descriptor"));
    last(s_des->add_option("--k", des.k, "design order"));
    last(s_des->add_option("--mode", des.mode, "exact or mc"));
    last(s_des->add_option("--samples", des.samples, "Monte Carlo samples"));

    auto *s_pow = app.add_subcommand("biclique-power", "detection power over a grid of planted-biclique instances");
    add_common(s_pow, common, true);
    last(s_pow->add_option("--detector", pow.detector, "edge-count, subgraph-scan or swap"));
    last(s_pow->add_option("--n", pow.n, "comma-separated site counts"));
    last(s_pow->add_option("--d", pow.d, "comma-separated local dimensions"));
    last(s_pow->add_option("--lambda", pow.lambda, "comma-separated planted sizes"));
    last(s_pow->add_option("--m", pow.m, "copies (0 means m = n)"));
    last(s_pow->add_option("--trials", pow.trials, "trials per cell"));
    last(s_pow->add_option("--t", pow.t, "scan copies"));
    last(s_pow->add_option("--t-prime", pow.t_prime, "scan sites"));
    last(s_pow->add_option("--scan-constant", pow.scan_constant, "scan threshold constant (0 = default)"));

    auto *s_mass = app.add_subcommand("biclique-mass", "exact Fourier mass of small position sets");
    add_common(s_mass, common, true);
    last(s_mass->add_option("--n", mass.n, "sites"));
    last(s_mass->add_option("--d", mass.d, "local dimension"));
    last(s_mass->add_option("--m", mass.m, "copies (0 means m = n)"));
    last(s_mass->add_option("--lambda", mass.lambda, "planted size"));
    last(s_mass->add_option("--max-size", mass.max_size, "largest |W|"));
    last(s_mass->add_option("--plan", mass.plan, "comp-basis or random-local"));
    last(s_mass->add_option("--C", mass.C, "constant inside the mass budget"));

    auto *s_mit = app.add_subcommand("mitigation", "purity decay, reduced-state tail and noisy-circuit advantage");
    add_common(s_mit, common, true);
    last(s_mit->add_option("--n", mit.n, "qubits"));
    last(s_mit->add_option("--l", mit.l, "blocks"));
    last(s_mit->add_option("--kappa", mit.kappa, "per-site depolarizing rate"));
    last(s_mit->add_option("--trials", mit.trials, "sampled circuits"));
    last(s_mit->add_option("--check", mit.check, "all, purity, reduced or test"));
    last(s_mit->add_option("--A", mit.A, "comma-separated sites for the reduced-state audit"));
    last(s_mit->add_option("--k", mit.k, "degree for the hypothesis test"));
    last(s_mit->add_option("--plan", mit.plan, "plan descriptor for the hypothesis test"));

    auto *s_haar = app.add_subcommand("haar-verify", "self-checks of the Haar moment engine");
    add_common(s_haar, common, true);
    last(s_haar->add_option("--samples", haar_args.samples, "Monte Carlo samples per moment"));
    last(s_haar->add_option("--dmax", haar_args.dmax, "largest local dimension"));
    last(s_haar->add_option("--kmax", haar_args.kmax, "largest moment order"));

    auto *s_list = app.add_subcommand("list", "registered ensembles, plans and detectors");
    add_common(s_list, common, false);
    last(s_list->add_option("--filter", filter, "substring filter"));

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = expand_config(args, app);
        std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
        app.parse(rev);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp &e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        CLI::App *sub = app.get_subcommands().front();
        auto *seed_opt = sub->get_option_no_throw("--seed");
        if (seed_opt && seed_opt->count() == 0) throw ConfigError("field 'seed' is required");
        if (common.format.empty()) common.format = sub == s_pow ? "csv" : "json";
        Artifact art;
        if (sub == s_list) {
            art.body = registry::list_registry(filter);
            art.summary = "list entries=" + std::to_string(std::count(art.body.begin(), art.body.end(), '\n'));
        } else if (sub == s_adv) {
            if (adv.ensemble.empty()) throw ConfigError("field 'ensemble' is required");
            art = run_advantage(adv, common);
        } else if (sub == s_des) {
            if (des.ensemble.empty()) throw ConfigError("field 'ensemble' is required");
            art = run_design(des, common);
        } else if (sub == s_pow) {
            art = run_power(pow, common);
        } else if (sub == s_mass) {
            art = run_mass(mass, common);
        } else if (sub == s_mit) {
            art = run_mitigation(mit, common);
        } else {
            art = run_haar(haar_args, common);
        }
        if (common.out.empty()) {
            out << art.body;
            err << art.summary << "\n";
        } else {
            write_atomic(common.out, art.body);
            out << art.summary << "\n";
        }
        if (!art.failures.empty()) {
            for (const auto &f : art.failures) err << f << "\n";
            return 3;
        }
        return 0;
    } catch (const ResourceError &e) {
        err << "resource limit: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error &e) {
        err << "invariant violated: " << e.what() << "\n";
        return 3;
    } catch (const std::exception &e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace qld::cli
