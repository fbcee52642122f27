#include <doctest.h>

#include <cmath>
#include <random>

#include "mna/sequences.hpp"

using namespace mna;

namespace {

CoefficientArray random_array(std::mt19937_64& rng, int rows, int cols) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<std::vector<complex>> data(rows);
    for (auto& row : data) {
        row.resize(cols);
        for (auto& v : row) v = complex{unif(rng), unif(rng)};
    }
    return CoefficientArray::from_rows(std::move(data));
}

} // namespace

TEST_CASE("lpq_norm basics") {
    // single nonzero entry: |v| for every (p,q)
    auto a = CoefficientArray::from_rows(
        {{complex{0, 0}, complex{3, 4}}, {complex{0, 0}}});
    for (double p : {0.5, 1.0, 2.0, infinity})
        for (double q : {0.7, 1.0, 3.0, infinity})
            CHECK(lpq_norm(a, p, q) == doctest::Approx(5.0).epsilon(1e-12));

    // rows {(3,4)}, {(5,12)} with p = 2, q = 1: 5 + 13
    auto b = CoefficientArray::from_rows(
        {{complex{3, 0}, complex{4, 0}}, {complex{5, 0}, complex{12, 0}}});
    CHECK(lpq_norm(b, 2.0, 1.0) == doctest::Approx(18.0).epsilon(1e-12));
}

TEST_CASE("p = q collapses to the flat norm") {
    std::mt19937_64 rng(3);
    auto a = random_array(rng, 4, 6);
    for (double p : {0.7, 1.0, 2.0, 3.5}) {
        double flat = 0.0;
        for (const auto& row : a.rows())
            for (const auto& v : row) flat += std::pow(std::abs(v), p);
        flat = std::pow(flat, 1.0 / p);
        CHECK(lpq_norm(a, p, p) == doctest::Approx(flat).epsilon(1e-12));
    }
}

TEST_CASE("inclusion: larger inner exponent shrinks the norm") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 20; ++t) {
        auto a = random_array(rng, 3, 8);
        const double q = 0.5 + (t % 5);
        CHECK(lpq_norm(a, 2.5, q) <= lpq_norm(a, 1.0, q) * (1 + 1e-12));
        CHECK(lpq_norm(a, infinity, q) <= lpq_norm(a, 3.0, q) * (1 + 1e-12));
    }
}

TEST_CASE("quasi-triangle inequality with exponent min{1,p,q}") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 25; ++t) {
        auto a = random_array(rng, 3, 5);
        auto b = random_array(rng, 3, 5);
        auto sum = a;
        for (int j = 0; j < 3; ++j)
            for (int l = 0; l < 5; ++l)
                sum.rows()[j][l] += b.rows()[j][l];
        const double p = 0.4 + 0.3 * (t % 7), q = 0.5 + 0.4 * (t % 5);
        const double tt = std::min({1.0, p, q});
        const double lhs = std::pow(lpq_norm(sum, p, q), tt);
        const double rhs = std::pow(lpq_norm(a, p, q), tt) +
                           std::pow(lpq_norm(b, p, q), tt);
        CHECK(lhs <= rhs * (1 + 1e-12));
    }
}

TEST_CASE("conjugate exponent table") {
    CHECK(conjugate_exponent(2.0) == doctest::Approx(2.0));
    CHECK(conjugate_exponent(0.5) == infinity);
    CHECK(conjugate_exponent(1.0) == infinity);
    CHECK(conjugate_exponent(infinity) == doctest::Approx(1.0));
    CHECK(conjugate_exponent(4.0) == doctest::Approx(4.0 / 3.0));
    // involution on (1, infinity)
    for (double p : {1.2, 1.9, 3.7, 11.0})
        CHECK(conjugate_exponent(conjugate_exponent(p)) ==
              doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("duality: single entry and self-dual case") {
    auto single = CoefficientArray::from_rows({{complex{0, 0}, complex{2, -1}}});
    const double v = std::abs(complex{2, -1});
    for (double p : {0.5, 2.0, 3.0})
        for (double q : {1.0, 2.0}) {
            auto gap = duality_gap(single, p, q, 50, 1);
            CHECK(gap.norm == doctest::Approx(v).epsilon(1e-12));
            CHECK(gap.lower == doctest::Approx(v).epsilon(1e-12));
        }

    std::mt19937_64 rng(13);
    auto b = random_array(rng, 4, 4);
    auto gap = duality_gap(b, 2.0, 2.0, 50, 1);
    CHECK(gap.lower == doctest::Approx(gap.norm).epsilon(1e-10));
}

TEST_CASE("duality: Hoelder extremizer reaches the dual norm") {
    std::mt19937_64 rng(17);
    auto b = random_array(rng, 4, 4);
    auto gap = duality_gap(b, 3.0, 1.5, 200, 2);
    CHECK(gap.lower >= 0.999 * gap.norm);
    CHECK(gap.lower <= gap.norm * (1 + 1e-12));
}

TEST_CASE("duality: boundary exponents use sign/coordinate extremizers") {
    std::mt19937_64 rng(19);
    for (auto [p, q] : {std::pair{0.5, 2.0}, {1.0, 1.0}, {infinity, 2.0},
                        {2.0, infinity}, {2.0, 0.8}}) {
        auto b = random_array(rng, 3, 4);
        auto gap = duality_gap(b, p, q, 100, 3);
        CHECK(gap.lower <= gap.norm * (1 + 1e-12));
        CHECK(gap.lower >= 0.999 * gap.norm);
    }
}

TEST_CASE("coefficient arrays align to a lattice") {
    auto L = build_lattice(2, 2, 2);
    CoefficientArray cells(L, false);
    CHECK(cells.entry_count() == std::size_t(L.total_cells()));
    CoefficientArray sub(L, true);
    CHECK(sub.entry_count() == std::size_t(L.total_subcells()));
    sub.at(1, 3, 4) = complex{1.0, 2.0};
    CHECK(sub.at(1, 3, 4) == complex{1.0, 2.0});
    CHECK(lpq_norm(sub, 2.0, 2.0) ==
          doctest::Approx(std::abs(complex{1.0, 2.0})));
}
