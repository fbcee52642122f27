#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mna/acceptance.hpp"
#include "mna/atoms.hpp"
#include "mna/carleson.hpp"
#include "mna/functions.hpp"
#include "mna/hardy.hpp"
#include "mna/lattice.hpp"
#include "mna/sequences.hpp"
#include "mna/weights.hpp"

namespace mna::cli {

using json = nlohmann::json;

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_numerical = 3;

struct RunOptions {
    std::filesystem::path out_dir = "out";
    unsigned threads = 1;
    std::uint64_t seed = 1;
};

// MNA_LOG: unset/quiet = 0, info = 1, debug = 2
inline int log_level() {
    const char* v = std::getenv("MNA_LOG");
    if (!v) return 0;
    const std::string s(v);
    if (s == "debug") return 2;
    if (s == "info") return 1;
    return 0;
}

inline void log_info(const std::string& msg) {
    if (log_level() >= 1) std::fprintf(stderr, "[mna] %s\n", msg.c_str());
}

namespace detail {

inline double num_at(const json& j, const std::string& field, double dflt,
                     bool required = false) {
    if (!j.contains(field)) {
        if (required) throw config_error("config: missing field '" + field + "'");
        return dflt;
    }
    if (j[field].is_string() && j[field] == "inf") return infinity;
    if (!j[field].is_number())
        throw config_error("config: field '" + field + "' must be a number");
    return j[field].get<double>();
}

} // namespace detail

inline RadialWeight weight_from_json(const json& cfg) {
    if (!cfg.contains("weight"))
        throw config_error("config: missing 'weight' block");
    const json& w = cfg["weight"];
    const std::string kind = w.value("kind", "");
    if (kind == "standard-power") {
        const double a = detail::num_at(w, "a", 0.0, true);
        if (a <= -1.0)
            throw config_error("config: weight.a must exceed -1");
        return RadialWeight::standard_power(a);
    }
    if (kind == "table") {
        if (!w.contains("knots") || !w["knots"].is_array())
            throw config_error("config: table weight needs 'knots' array");
        std::vector<std::pair<double, double>> knots;
        for (const auto& k : w["knots"]) {
            if (!k.is_array() || k.size() != 2)
                throw config_error("config: weight.knots entries are [r, w]");
            knots.emplace_back(k[0].get<double>(), k[1].get<double>());
        }
        return RadialWeight::from_table(std::move(knots));
    }
    if (kind == "exp-inverse") {
        // built-in negative control exp(-1/(1-r)), outside the upper
        // doubling class
        return RadialWeight::custom(
            [](double r) { return std::exp(-1.0 / (1.0 - r)); });
    }
    throw config_error(
        "config: weight.kind must be standard-power, table or exp-inverse");
}

inline DyadicLattice lattice_from_json(const json& cfg) {
    if (!cfg.contains("lattice"))
        throw config_error("config: missing 'lattice' block");
    const json& l = cfg["lattice"];
    const int K = static_cast<int>(detail::num_at(l, "K", 2));
    const int J = static_cast<int>(detail::num_at(l, "J_max", 5));
    const int M = static_cast<int>(detail::num_at(l, "M_sub", 1));
    return build_lattice(K, J, M);
}

inline AnalyticFunction function_from_json(const json& cfg) {
    if (!cfg.contains("function"))
        throw config_error("config: missing 'function' block");
    const json& f = cfg["function"];
    AnalyticFunction out;
    if (f.contains("monomials"))
        for (const auto& m : f["monomials"]) {
            if (!m.is_array() || m.size() != 3)
                throw config_error(
                    "config: function.monomials entries are [degree, re, im]");
            out.add_monomial(m[0].get<int>(),
                             complex{m[1].get<double>(), m[2].get<double>()});
        }
    if (f.contains("kernels"))
        for (const auto& k : f["kernels"]) {
            if (!k.is_array() || k.size() != 5)
                throw config_error(
                    "config: function.kernels entries are "
                    "[a_re, a_im, power, c_re, c_im]");
            out.add_kernel(complex{k[0].get<double>(), k[1].get<double>()},
                           k[2].get<double>(),
                           complex{k[3].get<double>(), k[4].get<double>()});
        }
    return out;
}

inline DiscreteMeasure measure_from_json(const json& cfg,
                                         const DyadicLattice* L = nullptr) {
    if (!cfg.contains("measure"))
        throw config_error("config: missing 'measure' block");
    const json& m = cfg["measure"];
    DiscreteMeasure mu;
    if (m.contains("points"))
        for (const auto& p : m["points"]) {
            if (!p.is_array() || p.size() != 3)
                throw config_error(
                    "config: measure.points entries are [re, im, mass]");
            mu.add(complex{p[0].get<double>(), p[1].get<double>()},
                   p[2].get<double>());
        }
    if (m.contains("cells")) {
        if (!L)
            throw config_error(
                "config: measure.cells requires a lattice block");
        for (const auto& c : m["cells"]) {
            if (!c.is_array() || c.size() != 3)
                throw config_error(
                    "config: measure.cells entries are [j, l, mass]");
            mu.add_cell(*L, c[0].get<int>(), c[1].get<long>(),
                        c[2].get<double>());
        }
    }
    if (m.contains("csv")) {
        std::ifstream is(m["csv"].get<std::string>());
        if (!is)
            throw config_error("config: measure.csv not readable: " +
                               m["csv"].get<std::string>());
        std::string header, line;
        std::getline(is, header);
        const bool cell_form = header.rfind("j,", 0) == 0;
        if (cell_form && !L)
            throw config_error("config: per-cell measure csv needs a lattice");
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string a, b, c;
            std::getline(ls, a, ',');
            std::getline(ls, b, ',');
            std::getline(ls, c, ',');
            if (cell_form)
                mu.add_cell(*L, std::stoi(a), std::stol(b), std::stod(c));
            else
                mu.add(complex{std::stod(a), std::stod(b)}, std::stod(c));
        }
    }
    return mu;
}

inline QuadratureConfig quad_from_json(const json& cfg) {
    QuadratureConfig q;
    if (!cfg.contains("quadrature")) return q;
    const json& j = cfg["quadrature"];
    q.n_circle = static_cast<int>(detail::num_at(j, "N_circle", q.n_circle));
    q.nodes_per_annulus = static_cast<int>(
        detail::num_at(j, "nodes_per_annulus", q.nodes_per_annulus));
    q.tail_rel_tol = detail::num_at(j, "tail_rel_tol", q.tail_rel_tol);
    if (!is_power_of_two(q.n_circle) || q.n_circle < 256)
        throw config_error(
            "config: quadrature.N_circle must be a power of two >= 256");
    return q;
}

struct Exponents {
    double p = 2.0, q = 2.0, s = 1.0;
    int n = 0;
};

inline Exponents exponents_from_json(const json& cfg) {
    Exponents e;
    if (!cfg.contains("exponents")) return e;
    const json& j = cfg["exponents"];
    e.p = detail::num_at(j, "p", e.p);
    e.q = detail::num_at(j, "q", e.q);
    e.s = detail::num_at(j, "s", e.s);
    e.n = static_cast<int>(detail::num_at(j, "n", e.n));
    if (!(e.p > 0.0)) throw config_error("config: exponents.p must be > 0");
    if (!(e.q > 0.0)) throw config_error("config: exponents.q must be > 0");
    if (!(e.s > 0.0)) throw config_error("config: exponents.s must be > 0");
    if (e.n < 0) throw config_error("config: exponents.n must be >= 0");
    return e;
}

inline json weight_echo(const json& cfg) {
    return cfg.contains("weight") ? cfg["weight"] : json{};
}

inline json metadata() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
    return json{{"tool", "mna"}, {"version", "0.1.0"}, {"generated_at", buf}};
}

inline void write_json(const std::filesystem::path& path, const json& j) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot write " + path.string());
    os << j.dump(2) << "\n";
}

inline void write_coefficients_csv(const std::filesystem::path& path,
                                   const DyadicLattice& L,
                                   const CoefficientArray& a,
                                   bool subcells) {
    std::ofstream os(path);
    if (!os) throw config_error("cannot write " + path.string());
    os << "j,l,k,re,im\n";
    os.precision(17);
    const int m2 = subcells ? L.M_sub() * L.M_sub() : 1;
    for (int j = 0; j <= L.J_max(); ++j)
        for (long l = 0; l < L.sectors(j); ++l)
            for (int k = 1; k <= m2; ++k) {
                const complex v = a.at(j, l, k);
                os << j << ',' << l << ',' << k << ',' << v.real() << ','
                   << v.imag() << '\n';
            }
}

namespace detail {

// class membership is a finding: checks that cannot be decided at the
// sampled resolution land in the report as null, not as a failed run
inline int run_weight(const json& cfg, const RunOptions& opt) {
    auto w = weight_from_json(cfg);
    json rep;
    rep["subcommand"] = "weight";
    rep["weight"] = weight_echo(cfg);
    bool in_upper = false;
    try {
        const auto up = check_upper_doubling(w);
        in_upper = up.member;
        rep["upper_doubling"] = {{"member", up.member},
                                 {"C_hat", up.constant}};
    } catch (const numerical_error& e) {
        rep["upper_doubling"] = {{"member", nullptr}, {"note", e.what()}};
    }
    const double K = num_at(cfg.contains("weight") ? cfg["weight"] : json{},
                            "K_check", 2.0);
    try {
        const auto low = check_lower_doubling(w, K);
        rep["lower_doubling"] = {
            {"member", low.member}, {"C_check", low.constant}, {"K", K}};
    } catch (const numerical_error& e) {
        rep["lower_doubling"] = {{"member", nullptr}, {"note", e.what()}};
    }
    if (in_upper) {
        const auto e = estimate_exponents(w);
        rep["exponents"] = {
            {"alpha", e.alpha}, {"beta", e.beta}, {"gamma", e.gamma}};
    } else {
        rep["exponents"] = nullptr;
        rep["note"] = "not in the upper doubling class at sampled resolution";
    }
    rep["metadata"] = metadata();
    write_json(opt.out_dir / "weight_report.json", rep);
    return exit_ok;
}

inline int run_lattice(const json& cfg, const RunOptions& opt) {
    auto L = lattice_from_json(cfg);
    json rep;
    rep["subcommand"] = "lattice";
    rep["K"] = L.K();
    rep["J_max"] = L.J_max();
    rep["M_sub"] = L.M_sub();
    rep["cells"] = L.total_cells();
    rep["subcells"] = L.total_subcells();
    rep["truncation_radius"] = L.truncation_radius();
    rep["min_center_separation"] = L.min_center_separation();
    rep["metadata"] = metadata();
    std::ofstream csv(opt.out_dir / "lattice.csv");
    export_lattice_csv(L, csv);
    write_json(opt.out_dir / "lattice_report.json", rep);
    return exit_ok;
}

inline int run_norm(const json& cfg, const RunOptions& opt) {
    auto w = weight_from_json(cfg);
    auto L = lattice_from_json(cfg);
    auto f = function_from_json(cfg);
    const auto e = exponents_from_json(cfg);
    const auto quad = quad_from_json(cfg);
    json rep;
    rep["subcommand"] = "norm";
    rep["exponents"] = {{"p", e.p}, {"q", e.q}, {"s", e.s}, {"n", e.n}};
    const auto res = mixed_norm_detailed(f, e.p, e.q, w, L, quad);
    rep["mixed_norm"] = res.value;
    rep["tail_estimate"] = res.tail_estimate;
    rep["r_stop"] = res.r_stop;
    rep["annuli"] = res.annuli;
    rep["quadrature"] = {{"N_circle", quad.n_circle},
                         {"nodes_per_annulus", quad.nodes_per_annulus},
                         {"J_max", L.J_max()}};
    if (cfg.contains("measure")) {
        const auto mu = measure_from_json(cfg, &L);
        rep["lebesgue_norm"] = lebesgue_norm(f, e.s, mu, e.n);
    }
    rep["metadata"] = metadata();
    write_json(opt.out_dir / "norm_report.json", rep);
    return exit_ok;
}

inline CoefficientArray coefficients_from_json(const json& cfg,
                                               const DyadicLattice& L,
                                               std::uint64_t seed) {
    CoefficientArray lam(L, false);
    if (!cfg.contains("coefficients"))
        throw config_error("config: missing 'coefficients' block");
    const json& c = cfg["coefficients"];
    if (c.contains("values")) {
        for (const auto& v : c["values"]) {
            if (!v.is_array() || v.size() != 4)
                throw config_error(
                    "config: coefficients.values entries are [j, l, re, im]");
            lam.at(v[0].get<int>(), v[1].get<long>()) =
                complex{v[2].get<double>(), v[3].get<double>()};
        }
        return lam;
    }
    if (c.contains("csv")) {
        std::ifstream is(c["csv"].get<std::string>());
        if (!is)
            throw config_error("config: coefficients.csv not readable: " +
                               c["csv"].get<std::string>());
        std::string line;
        std::getline(is, line); // header j,l,k,re,im
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            std::istringstream ls(line);
            std::string j, l, k, re, im;
            std::getline(ls, j, ',');
            std::getline(ls, l, ',');
            std::getline(ls, k, ',');
            std::getline(ls, re, ',');
            std::getline(ls, im, ',');
            lam.at(std::stoi(j), std::stol(l)) =
                complex{std::stod(re), std::stod(im)};
        }
        return lam;
    }
    if (c.contains("random_unit")) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (auto& row : lam.rows())
            for (auto& v : row) v = complex{gauss(rng), gauss(rng)};
        return lam;
    }
    throw config_error(
        "config: coefficients needs 'values', 'csv' or 'random_unit'");
}

inline int run_synth(const json& cfg, const RunOptions& opt) {
    auto w = weight_from_json(cfg).analyzed();
    auto L = lattice_from_json(cfg);
    const auto e = exponents_from_json(cfg);
    const auto quad = quad_from_json(cfg);
    auto lam = coefficients_from_json(cfg, L, opt.seed);
    auto prm = make_atom_params(e.p, e.q, w, L.M_sub());
    auto F = synthesize_on_centers(lam, L, prm, w);
    json rep;
    rep["subcommand"] = "synth";
    rep["M_exp"] = prm.M_exp;
    rep["lambda_norm"] = lpq_norm(lam, e.p, e.q);
    rep["F_norm"] = mixed_norm(F, e.p, e.q, w, L, quad);
    rep["terms"] = F.term_count();
    rep["ratio"] =
        rep["lambda_norm"].get<double>() > 0.0
            ? rep["F_norm"].get<double>() / rep["lambda_norm"].get<double>()
            : 0.0;
    rep["metadata"] = metadata();
    write_json(opt.out_dir / "synth_report.json", rep);
    return exit_ok;
}

inline int run_analyze(const json& cfg, const RunOptions& opt) {
    auto w = weight_from_json(cfg).analyzed();
    auto L = lattice_from_json(cfg);
    auto f = function_from_json(cfg);
    const auto e = exponents_from_json(cfg);
    auto lam = analyze(f, L, e.p, e.q, w);
    json rep;
    rep["subcommand"] = "analyze";
    rep["lambda_norm"] = lpq_norm(lam, e.p, e.q);
    rep["metadata"] = metadata();
    write_coefficients_csv(opt.out_dir / "analyze_coefficients.csv", L, lam,
                           false);
    write_json(opt.out_dir / "analyze_report.json", rep);
    return exit_ok;
}

inline int run_decompose(const json& cfg, const RunOptions& opt) {
    auto w = weight_from_json(cfg).analyzed();
    auto L = lattice_from_json(cfg);
    auto f = function_from_json(cfg);
    const auto e = exponents_from_json(cfg);
    const auto quad = quad_from_json(cfg);
    const int n_iter = static_cast<int>(num_at(
        cfg.contains("decompose") ? cfg["decompose"] : json{}, "n_iter", 8));
    auto prm = make_atom_params(e.p, e.q, w, L.M_sub());
    auto res = atomic_decompose(f, L, prm, w, n_iter, quad, opt.threads);
    json rep;
    rep["subcommand"] = "decompose";
    rep["params"] = {{"p", prm.p},
                     {"q", prm.q},
                     {"M_exp", prm.M_exp},
                     {"eta", prm.eta},
                     {"theta", prm.theta},
                     {"eta_proj", prm.eta_proj},
                     {"M_sub", L.M_sub()},
                     {"n_iter", n_iter}};
    rep["residual_history"] = res.residual_history;
    rep["coefficient_norm"] = res.coefficient_norm;
    rep["reconstruction_error"] = res.reconstruction_error;
    rep["aborted"] = res.aborted;
    if (res.aborted) rep["diagnostic"] = res.diagnostic;
    rep["metadata"] = metadata();
    write_coefficients_csv(opt.out_dir / "decompose_coefficients.csv", L,
                           res.lambda, true);
    write_json(opt.out_dir / "decompose_report.json", rep);
    if (res.aborted) {
        std::fprintf(stderr, "decompose aborted: %s\n", res.diagnostic.c_str());
        return exit_numerical;
    }
    return exit_ok;
}

inline int run_carleson(const json& cfg, const RunOptions& opt) {
    auto w = weight_from_json(cfg).analyzed();
    auto L = lattice_from_json(cfg);
    const auto e = exponents_from_json(cfg);
    const auto quad = quad_from_json(cfg);
    const json& cj = cfg.contains("carleson") ? cfg["carleson"] : json{};
    const double r = num_at(cj, "r", 0.5);
    const int trials = static_cast<int>(num_at(cj, "trials", 10));
    auto mu = measure_from_json(cfg, &L);
    auto ccfg = CarlesonConfig::make(e.p, e.q, e.s, e.n, r);
    auto rep_ = equivalence_report(mu, w, L, ccfg, trials, opt.seed, quad,
                                   opt.threads);
    json rep;
    rep["subcommand"] = "carleson";
    rep["case"] = to_string(ccfg.case_tag);
    rep["u"] = ccfg.u;
    rep["v"] = ccfg.v;
    rep["r"] = r;
    rep["exponents"] = {{"p", e.p}, {"q", e.q}, {"s", e.s}, {"n", e.n}};
    rep["opnorm_lower"] = rep_.opnorm_lower;
    rep["opnorm_lower_pow_s"] = rep_.opnorm_lower_pow_s;
    rep["condition_ii_norm"] = rep_.cond_ii_norm;
    rep["condition_iii_norm"] = rep_.cond_iii_norm;
    rep["ratio_ii_iii"] = rep_.ratio_ii_iii;
    rep["ratio_op_ii"] = rep_.ratio_op_ii;
    rep["boundedness_certified"] = rep_.boundedness_certified;
    rep["lattice"] = {{"K", L.K()}, {"J_max", L.J_max()}};
    rep["metadata"] = metadata();
    auto cii = condition_ii(mu, L, w, ccfg);
    write_coefficients_csv(opt.out_dir / "carleson_condition_ii.csv", L,
                           cii.sequence, false);
    write_json(opt.out_dir / "carleson_report.json", rep);
    return exit_ok;
}

inline int run_hardy(const json& cfg, const RunOptions& opt) {
    auto w = weight_from_json(cfg).analyzed();
    const auto e = w.exponents();
    const json& hj = cfg.contains("hardy") ? cfg["hardy"] : json{};
    const int N = static_cast<int>(num_at(hj, "N", 32));
    const int K = static_cast<int>(num_at(hj, "K", 8));
    json rows = json::array();
    std::printf("case    weight          N   sup_A      sup_B      stable\n");
    for (auto pc : {ProofCase::s1_12, ProofCase::s2_12, ProofCase::s5_22,
                    ProofCase::s6_22, ProofCase::s7_32, ProofCase::s8_32}) {
        double p = 0.5, q = 1.0, eta = 0.0, theta = 0.0;
        if (pc == ProofCase::s5_22 || pc == ProofCase::s6_22) {
            p = 1.1;
            q = 2.0;
        } else if (pc == ProofCase::s7_32 || pc == ProofCase::s8_32) {
            p = infinity;
            q = 2.0;
        }
        const double M = 1.0 + inv_or_zero(p) + (e.beta + e.gamma) / q + 0.5;
        if (pc == ProofCase::s5_22 || pc == ProofCase::s6_22) {
            const auto et = solve_eta_theta(p, q, e.alpha, e.beta, e.gamma, M);
            eta = et.eta;
            theta = et.theta;
        }
        const auto full = build_proof_steps(pc, w, K, p, q, M, eta, theta, N);
        const auto half =
            build_proof_steps(pc, w, K, p, q, M, eta, theta, N / 2);
        const double supA = muckenhoupt_A(full.U, full.V, full.s).sup;
        const double supB = muckenhoupt_B(full.U, full.V, full.s).sup;
        const double designated = full.side == 'A' ? supA : supB;
        const double designated_half =
            half.side == 'A' ? muckenhoupt_A(half.U, half.V, half.s).sup
                             : muckenhoupt_B(half.U, half.V, half.s).sup;
        const bool stable =
            std::abs(designated / designated_half - 1.0) <= 0.10;
        std::printf("%-7s %-14s %3d %-10.4g %-10.4g %s\n", to_string(pc),
                    cfg["weight"].value("kind", "?").c_str(), N, supA, supB,
                    stable ? "yes" : "no");
        rows.push_back({{"case", to_string(pc)},
                        {"p", p == infinity ? json("inf") : json(p)},
                        {"q", q},
                        {"M", M},
                        {"side", std::string(1, full.side)},
                        {"s", full.s},
                        {"N", N},
                        {"sup_A", supA},
                        {"sup_B", supB},
                        {"stable", stable}});
    }
    json rep;
    rep["subcommand"] = "hardy";
    rep["K"] = K;
    rep["weight"] = weight_echo(cfg);
    rep["rows"] = rows;
    rep["metadata"] = metadata();
    write_json(opt.out_dir / "hardy_report.json", rep);
    return exit_ok;
}

inline int run_verify(const json&, const RunOptions& opt) {
    const auto results = run_acceptance(opt.threads);
    json rows = json::array();
    int failures = 0;
    for (const auto& r : results) {
        std::printf("%s [%2d] %s — %s\n", r.pass ? "PASS" : "FAIL", r.id,
                    r.name.c_str(), r.detail.c_str());
        rows.push_back({{"id", r.id},
                        {"name", r.name},
                        {"pass", r.pass},
                        {"detail", r.detail}});
        if (!r.pass) ++failures;
    }
    json rep;
    rep["subcommand"] = "verify";
    rep["criteria"] = rows;
    rep["failures"] = failures;
    rep["metadata"] = metadata();
    write_json(opt.out_dir / "verify_report.json", rep);
    return failures == 0 ? exit_ok : 1;
}

} // namespace detail

inline int run(const std::string& sub, const json& config,
               const RunOptions& opt) {
    try {
        std::filesystem::create_directories(opt.out_dir);
        log_info("running '" + sub + "'");
        if (sub == "weight") return detail::run_weight(config, opt);
        if (sub == "lattice") return detail::run_lattice(config, opt);
        if (sub == "norm") return detail::run_norm(config, opt);
        if (sub == "synth") return detail::run_synth(config, opt);
        if (sub == "analyze") return detail::run_analyze(config, opt);
        if (sub == "decompose") return detail::run_decompose(config, opt);
        if (sub == "carleson") return detail::run_carleson(config, opt);
        if (sub == "hardy") return detail::run_hardy(config, opt);
        if (sub == "verify") return detail::run_verify(config, opt);
        std::fprintf(stderr, "unknown subcommand '%s'\n", sub.c_str());
        return exit_config;
    } catch (const config_error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return exit_config;
    } catch (const numerical_error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return exit_numerical;
    } catch (const std::exception& e) {
        // malformed csv fields and the like
        std::fprintf(stderr, "config: %s\n", e.what());
        return exit_config;
    }
}

} // namespace mna::cli
