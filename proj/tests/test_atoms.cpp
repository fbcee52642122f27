#include <doctest.h>

#include <cmath>
#include <random>

#include "mna/atoms.hpp"
#include "mna/quadrature.hpp"

using namespace mna;

namespace {

const RadialWeight& lebesgue() {
    static RadialWeight w = RadialWeight::standard_power(0.0).analyzed();
    return w;
}

double fitted_log_ratio(const std::vector<double>& hist, int from) {
    std::vector<double> logs;
    for (std::size_t i = from; i < hist.size(); ++i)
        logs.push_back(std::log(std::max(hist[i], 1e-300)));
    return fit_slope(logs.data(), int(logs.size()));
}

} // namespace

TEST_CASE("min_atom_order thresholds with measured exponents") {
    // beta = gamma = 1.05 for the constant weight at the sampler resolution
    CHECK(min_atom_order(2.0, 2.0, lebesgue()) ==
          doctest::Approx(3.05).epsilon(1e-9));
    CHECK(min_atom_order(infinity, 1.0, lebesgue()) ==
          doctest::Approx(3.6).epsilon(1e-9));
    CHECK(min_atom_order(1.0, 1.0, lebesgue()) ==
          doctest::Approx(4.6).epsilon(1e-9));
}

TEST_CASE("solve_eta_theta on the worked example") {
    // p = q = 2, alpha = beta = 1, gamma = 1.01, M = 4
    const auto et = solve_eta_theta(2.0, 2.0, 1.0, 1.0, 1.01, 4.0);
    const double lo = 1.01 / 7.0;
    const double hi = std::min(1.0 - 1.0 / 6.0, 3.0 / 3.5);
    CHECK(et.eta == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-12));
    CHECK(et.eta == doctest::Approx(0.488810).epsilon(1e-5));
    const double th_lo = (3.0 * et.eta + 0.5) / 4.0;
    const double th_hi = (3.5 * et.eta + 0.5) / 4.0;
    CHECK(th_lo < th_hi);
    CHECK(et.theta == doctest::Approx(0.5 * (th_lo + th_hi)).epsilon(1e-12));
    CHECK(detail::violated_parameter_inequality(2.0, 2.0, 1.0, 1.0, 1.01, 4.0,
                                                et.eta, et.theta) == 0);
}

TEST_CASE("solve_eta_theta rejects inadmissible orders") {
    // M - 1/p - beta/q <= 0: inequality 3 unsatisfiable
    CHECK_THROWS_WITH_AS(solve_eta_theta(2.0, 2.0, 1.0, 1.0, 1.0, 1.0),
                         doctest::Contains("inequality 3"), numerical_error);
    // interval between inequalities 3 and 5 empty
    CHECK_THROWS_WITH_AS(solve_eta_theta(2.0, 2.0, 1.0, 1.0, 1.0, 1.8),
                         doctest::Contains("3 and 5"), numerical_error);
    CHECK_THROWS_AS(solve_eta_theta(0.8, 2.0, 1.0, 1.0, 1.0, 9.0),
                    config_error);
}

TEST_CASE("solve_eta_theta satisfies all six inequalities on random draws") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int t = 0; t < 100; ++t) {
        const double p = 1.05 + 5.0 * unif(rng);
        const double q = 0.4 + 5.0 * unif(rng);
        const double beta = 0.2 + 3.0 * unif(rng);
        const double alpha = beta * (0.2 + 0.8 * unif(rng));
        const double gamma = 0.2 + 3.0 * unif(rng);
        const double M =
            1.0 + 1.0 / p + (beta + gamma) / q + 0.05 + 2.0 * unif(rng);
        const auto et = solve_eta_theta(p, q, alpha, beta, gamma, M);
        CHECK(et.eta > 0.0);
        CHECK(et.eta < 1.0);
        CHECK(et.theta > 0.0);
        CHECK(et.theta < 1.0);
        CHECK(detail::violated_parameter_inequality(p, q, alpha, beta, gamma,
                                                    M, et.eta, et.theta) == 0);
    }
}

TEST_CASE("synthesize: zero, single atom, separation guard") {
    auto prm = make_atom_params(2.0, 2.0, lebesgue());
    std::vector<complex> pts{complex{0.5, 0.0}, complex{-0.3, 0.2}};

    auto F0 = synthesize(std::vector<complex>{complex{0, 0}, complex{0, 0}},
                         pts, prm, lebesgue());
    CHECK(F0.term_count() == 0);
    CHECK(std::abs(F0(complex{0.2, 0.1})) == 0.0);

    auto F = synthesize(std::vector<complex>{complex{1, 0}, complex{0, 0}},
                        pts, prm, lebesgue());
    const double expect = std::pow(0.5, prm.M_exp - 0.5) *
                          std::pow(lebesgue().tail(0.5), -0.5);
    CHECK(std::abs(F(complex{0, 0}) - complex{expect, 0.0}) < 1e-14);

    std::vector<complex> dup{complex{0.5, 0.0}, complex{0.5, 0.0}};
    CHECK_THROWS_WITH_AS(
        synthesize(std::vector<complex>{complex{1, 0}, complex{1, 0}}, dup,
                   prm, lebesgue()),
        "sequence not separated", config_error);
}

TEST_CASE("analyze: constants and the identity") {
    auto L = build_lattice(2, 4, 1);
    const auto& w = lebesgue();
    const double p = 2.0, q = 2.0;

    auto lam1 = analyze(AnalyticFunction::constant(1.0), L, p, q, w);
    for (int j = 0; j <= L.J_max(); ++j) {
        const double expect = std::pow(2.0, -j / p) *
                              std::pow(w.tail(L.radius(j)), 1.0 / q);
        for (long l = 0; l < L.sectors(j); ++l)
            CHECK(std::abs(lam1.at(j, l) - complex{expect, 0.0}) < 1e-14);
    }

    // |z| peaks on the outer edge, which the closed sampling grid contains
    auto lamz = analyze(AnalyticFunction::monomial(1), L, p, q, w);
    for (int j = 0; j <= L.J_max(); ++j) {
        const double expect = std::pow(2.0, -j / p) *
                              std::pow(w.tail(L.radius(j)), 1.0 / q) *
                              L.radius(j + 1);
        CHECK(std::abs(lamz.at(j, 0) - complex{expect, 0.0}) < 1e-6 * expect);
    }
}

TEST_CASE("analyze: grid sup within 2 percent of a denser-grid oracle") {
    auto L = build_lattice(2, 6, 1);
    auto f = AnalyticFunction::kernel(complex{0.9, 0.0}, 3.0);
    const auto& w = lebesgue();
    auto coarse = analyze(f, L, 2.0, 2.0, w, 8);
    auto fine = analyze(f, L, 2.0, 2.0, w, 29); // 4x finer spacing refines the 8-grid
    for (int j = 0; j <= L.J_max(); ++j)
        for (long l = 0; l < L.sectors(j); ++l) {
            const double c = std::abs(coarse.at(j, l));
            const double d = std::abs(fine.at(j, l));
            CHECK(c <= d * (1 + 1e-12));
            CHECK(c >= 0.98 * d);
        }
}

TEST_CASE("subcell-center evaluation: ring FFT equals direct sweep") {
    auto L = build_lattice(2, 4, 2);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    AnalyticFunction f;
    for (int i = 0; i < 80; ++i)
        f.add_kernel(std::polar(0.9 * std::abs(unif(rng)), pi * unif(rng)),
                     4.0, complex{unif(rng), unif(rng)});
    const auto fast = evaluate_on_subcell_centers(f, L);
    double scale = 0.0;
    for (const auto& v : fast) scale = std::max(scale, std::abs(v));
    std::size_t i = 0;
    for (int j = 0; j <= L.J_max(); ++j)
        for (long l = 0; l < L.sectors(j); ++l)
            for (int k = 1; k <= 4; ++k, ++i)
                CHECK(std::abs(fast[i] - f(L.subcell_center(j, l, k))) <
                      1e-11 * scale);
}

TEST_CASE("apply_S_eta: zero function and reproducing trend on constants") {
    const auto& w = lebesgue();
    auto prm = make_atom_params(2.0, 2.0, w);

    auto L0 = build_lattice(2, 4, 1);
    auto z = apply_S_eta(AnalyticFunction::zero(), L0, prm, w);
    CHECK(z.g.term_count() == 0);
    CHECK(lpq_norm(z.a, 2.0, 2.0) == 0.0);

    // g(0) -> 1 as the truncation deepens and subcells shrink
    double prev_err = 2.0;
    for (auto [J, msub] : {std::pair{4, 1}, {6, 2}, {7, 3}}) {
        auto L = build_lattice(2, J, msub);
        prm.M_sub = msub;
        auto r = apply_S_eta(AnalyticFunction::constant(1.0), L, prm, w);
        const double err = std::abs(r.g(complex{0.0, 0.0}) - 1.0);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 0.04);
}

TEST_CASE("apply_S_eta coefficients match hand evaluation") {
    const auto& w = lebesgue();
    auto prm = make_atom_params(2.0, 2.0, w, 2);
    auto L = build_lattice(2, 3, 2);
    auto f = AnalyticFunction::kernel(complex{0.4, 0.3}, 3.0);
    auto r = apply_S_eta(f, L, prm, w);
    std::mt19937_64 rng(17);
    for (int t = 0; t < 5; ++t) {
        const int j = int(rng() % 4);
        const long l = long(rng() % L.sectors(j));
        const int k = 1 + int(rng() % 4);
        const complex c = L.subcell_center(j, l, k);
        const complex expect = f(c) *
                               std::pow(1.0 - std::norm(c), 1.0 / prm.p) *
                               std::pow(w.tail(L.radius(j)), 1.0 / prm.q);
        CHECK(std::abs(r.a.at(j, l, k) - expect) < 1e-12);
    }
}

TEST_CASE("atomic_decompose: zero input") {
    const auto& w = lebesgue();
    auto prm = make_atom_params(2.0, 2.0, w, 2);
    auto L = build_lattice(2, 3, 2);
    auto res = atomic_decompose(AnalyticFunction::zero(), L, prm, w, 3);
    CHECK_FALSE(res.aborted);
    for (double r : res.residual_history) CHECK(r == 0.0);
    CHECK(res.coefficient_norm == 0.0);
}

TEST_CASE("atomic_decompose: contraction trend in M_sub") {
    const auto& w = lebesgue();
    auto L1 = build_lattice(2, 4, 1);
    auto L4 = build_lattice(2, 4, 4);
    AnalyticFunction f;
    f.add_monomial(0, 1.0).add_monomial(1, 0.5);

    auto prm1 = make_atom_params(2.0, 2.0, w, 1);
    auto prm4 = make_atom_params(2.0, 2.0, w, 4);
    QuadratureConfig quad;
    quad.n_circle = 512;
    auto r1 = atomic_decompose(f, L1, prm1, w, 6, quad);
    auto r4 = atomic_decompose(f, L4, prm4, w, 6, quad);

    REQUIRE(r4.residual_history.size() >= 5);
    // finer subdivision contracts faster
    const double s1 = fitted_log_ratio(r1.residual_history, 1);
    const double s4 = fitted_log_ratio(r4.residual_history, 1);
    CHECK(s4 < s1);
    // and the fine run is an actual contraction
    for (std::size_t n = 2; n < r4.residual_history.size(); ++n)
        CHECK(r4.residual_history[n] < r4.residual_history[n - 1]);
    CHECK(r4.reconstruction_error < 0.1);
}

TEST_CASE("atomic_decompose: reconstruction equals the accumulated sum") {
    const auto& w = lebesgue();
    auto L = build_lattice(2, 3, 2);
    auto prm = make_atom_params(2.0, 2.0, w, 2);
    auto f = AnalyticFunction::kernel(complex{0.3, -0.2}, 3.0);
    auto res = atomic_decompose(f, L, prm, w, 4);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    for (int t = 0; t < 10; ++t) {
        const complex z{unif(rng), unif(rng)};
        CHECK(std::abs(res.reconstruction(z) - f(z)) <
              2.0 * res.residual_history.back() + 1e-9);
    }
}

TEST_CASE("decomposition coefficient norms track the function norm") {
    const auto& w = lebesgue();
    auto L = build_lattice(2, 4, 2);
    auto prm = make_atom_params(2.0, 2.0, w, 2);
    QuadratureConfig quad;
    quad.n_circle = 512;
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double lo = infinity, hi = 0.0;
    for (int t = 0; t < 6; ++t) {
        AnalyticFunction f;
        if (t < 3)
            f.add_monomial(t, 1.0);
        else
            f.add_kernel(std::polar(0.4 * std::abs(unif(rng)), pi * unif(rng)),
                         2.0 + std::abs(unif(rng)),
                         complex{unif(rng), unif(rng)});
        auto res = atomic_decompose(f, L, prm, w, 6, quad);
        REQUIRE_FALSE(res.aborted);
        const double ratio = res.coefficient_norm / res.residual_history[0];
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    // the ratio ||lambda(f)|| / ||f|| stays in a narrow band over the family
    CHECK(lo > 0.0);
    CHECK(hi / lo <= 10.0);
}

TEST_CASE("a-coefficient norm controlled by the analysis norm") {
    const auto& w = lebesgue();
    auto L = build_lattice(2, 4, 1);
    auto prm = make_atom_params(2.0, 2.0, w, 1);
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int t = 0; t < 5; ++t) {
        AnalyticFunction f;
        for (int i = 0; i < 4; ++i)
            f.add_monomial(int(rng() % 6), complex{unif(rng), unif(rng)});
        auto a = apply_S_eta(f, L, prm, w).a;
        auto lam = analyze(f, L, prm.p, prm.q, w);
        const double na = lpq_norm(a, prm.p, prm.q);
        const double nl = lpq_norm(lam, prm.p, prm.q);
        CHECK(na <= 1.5 * nl);
    }
}

TEST_CASE("norm equivalence window at unit-test scale") {
    const auto& w = lebesgue();
    auto L = build_lattice(2, 4, 1);
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double lo = infinity, hi = 0.0;
    for (int t = 0; t < 8; ++t) {
        AnalyticFunction f;
        if (t < 4)
            f.add_monomial(t, 1.0);
        else
            f.add_kernel(std::polar(0.5 * std::abs(unif(rng)), pi * unif(rng)),
                         3.0, complex{unif(rng), unif(rng)});
        const double num = lpq_norm(analyze(f, L, 2.0, 2.0, w), 2.0, 2.0);
        const double den = mixed_norm(f, 2.0, 2.0, w, L);
        const double ratio = num / den;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    CHECK(hi / lo <= 50.0);
}
