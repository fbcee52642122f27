#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "mna/lattice.hpp"

using namespace mna;

namespace {

// containment oracle straight off the cell boxes
bool in_box(const DyadicLattice& L, int j, long l, complex z) {
    const CellBox b = L.box(j, l);
    const double az = std::abs(z);
    if (az < b.r_lo || az >= b.r_hi) return false;
    double t = std::arg(z);
    if (t < 0) t += 2 * pi;
    return t >= b.theta_lo && t < b.theta_hi;
}

CellIndex locate_brute(const DyadicLattice& L, complex z) {
    for (int j = 0; j <= L.J_max(); ++j)
        for (long l = 0; l < L.sectors(j); ++l)
            if (in_box(L, j, l, z)) return {j, l};
    throw std::runtime_error("not found");
}

// full-scan neighbor oracle over all cell pairs
std::vector<CellIndex> neighbors_brute(const DyadicLattice& L, int j, long l,
                                       NeighborMode mode, double r) {
    const double thresh =
        std::pow(double(L.K()), -(j + 1)) * (1.0 - 1.0 / double(L.K()));
    const auto own = L.sample_points(j, l);
    std::vector<CellIndex> out;
    for (int i = 0; i <= L.J_max(); ++i)
        for (long m = 0; m < L.sectors(i); ++m) {
            const auto other = L.sample_points(i, m);
            double dmin = 1e300, pmin = 1.0;
            for (const auto& x : own)
                for (const auto& y : other) {
                    dmin = std::min(dmin, std::abs(x - y));
                    pmin = std::min(pmin, pseudo_distance(x, y));
                }
            const bool hit = mode == NeighborMode::euclidean
                                 ? dmin <= thresh * (1.0 + 1e-12)
                                 : pmin < r;
            if (hit) out.push_back({i, m});
        }
    return out;
}

} // namespace

TEST_CASE("cell counts follow K^{j+3}") {
    auto L0 = build_lattice(2, 0, 1);
    CHECK(L0.total_cells() == 8);
    auto L2 = build_lattice(2, 2, 1);
    CHECK(L2.total_cells() == 8 + 16 + 32);
    auto L3 = build_lattice(3, 1, 1);
    CHECK(L3.total_cells() == 27 + 81);
}

TEST_CASE("cell budget guard") {
    CHECK_THROWS_AS(build_lattice(2, 25, 1), config_error);
    CHECK_THROWS_AS(build_lattice(2, 8, 50), config_error);
}

TEST_CASE("first cell geometry for K = 2") {
    auto L = build_lattice(2, 1, 1);
    const CellBox b = L.box(0, 0);
    CHECK(b.r_lo == doctest::Approx(0.0));
    CHECK(b.r_hi == doctest::Approx(0.5));
    CHECK(b.theta_lo == doctest::Approx(0.0));
    CHECK(b.theta_hi == doctest::Approx(pi / 4));
    const complex c = L.center(0, 0);
    CHECK(std::abs(c - std::polar(0.25, pi / 8)) < 1e-15);
}

TEST_CASE("locate basics") {
    auto L = build_lattice(2, 3, 1);
    CHECK(L.locate(complex{0.0, 0.0}) == CellIndex{0, 0});
    CHECK(L.locate(complex{0.6, 0.0}) == CellIndex{1, 0});
    CHECK_THROWS_AS(L.locate(complex{0.99, 0.0}), config_error);
}

TEST_CASE("locate agrees with brute-force containment on random points") {
    auto L = build_lattice(2, 4, 1);
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ang(0.0, 2 * pi);
    std::uniform_real_distribution<double> rad(0.0, L.truncation_radius());
    for (int t = 0; t < 1000; ++t) {
        const complex z = std::polar(rad(rng), ang(rng));
        CHECK(L.locate(z) == locate_brute(L, z));
    }
}

TEST_CASE("locate of center is the identity") {
    auto L = build_lattice(2, 5, 1);
    for (int j = 0; j <= L.J_max(); ++j)
        for (long l = 0; l < L.sectors(j); ++l)
            CHECK(L.locate(L.center(j, l)) == CellIndex{j, l});
}

TEST_CASE("pseudo distance") {
    CHECK(pseudo_distance(complex{0, 0}, complex{0, 0.3}) ==
          doctest::Approx(0.3));
    CHECK(pseudo_distance(complex{0.5, 0}, complex{0.5, 0}) == 0.0);
    CHECK(pseudo_distance(complex{0.5, 0}, complex{-0.5, 0}) ==
          doctest::Approx(0.8));
    CHECK_THROWS_AS(pseudo_distance(complex{1.0, 0}, complex{0, 0}),
                    config_error);
}

TEST_CASE("pseudo distance is Moebius invariant") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> unif(-0.7, 0.7);
    for (int t = 0; t < 100; ++t) {
        const complex a{unif(rng), unif(rng)};
        const complex u{unif(rng), unif(rng)};
        const complex v{unif(rng), unif(rng)};
        auto phi = [&](complex z) { return (a - z) / (1.0 - std::conj(a) * z); };
        CHECK(pseudo_distance(phi(u), phi(v)) ==
              doctest::Approx(pseudo_distance(u, v)).epsilon(1e-12));
    }
}

TEST_CASE("annulus partition: cell areas sum to the annulus area") {
    auto L = build_lattice(2, 4, 1);
    for (int j = 0; j <= L.J_max(); ++j) {
        double sum = 0.0;
        for (long l = 0; l < L.sectors(j); ++l) sum += L.cell_area(j, l);
        const double exact =
            pi * (L.radius(j + 1) * L.radius(j + 1) - L.radius(j) * L.radius(j));
        CHECK(sum == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("subcells: equal areas, disjoint boxes, exact cover") {
    auto L = build_lattice(2, 3, 3);
    for (int j = 0; j <= L.J_max(); ++j)
        for (long l : {0L, L.sectors(j) / 2}) {
            const double target = L.cell_area(j, l) / 9.0;
            double sum = 0.0;
            for (int k = 1; k <= 9; ++k) {
                const CellBox b = L.subcell_box(j, l, k);
                const double area =
                    0.5 * (b.theta_hi - b.theta_lo) *
                    (b.r_hi * b.r_hi - b.r_lo * b.r_lo);
                CHECK(area == doctest::Approx(target).epsilon(1e-12));
                sum += area;
                CHECK(L.locate(L.subcell_center(j, l, k)) == CellIndex{j, l});
            }
            CHECK(sum == doctest::Approx(L.cell_area(j, l)).epsilon(1e-12));
        }
}

TEST_CASE("neighbors match the full-scan oracle") {
    auto L = build_lattice(2, 4, 1);
    std::mt19937_64 rng(3);
    for (int t = 0; t < 40; ++t) {
        const int j = int(rng() % (L.J_max() + 1));
        const long l = long(rng() % L.sectors(j));
        for (auto mode : {NeighborMode::euclidean, NeighborMode::pseudo}) {
            auto got = L.neighbors(j, l, mode, 0.6);
            auto want = neighbors_brute(L, j, l, mode, 0.6);
            auto key = [](const CellIndex& c) {
                return std::pair<int, long>(c.j, c.l);
            };
            std::sort(got.begin(), got.end(), [&](auto a, auto b) {
                return key(a) < key(b);
            });
            std::sort(want.begin(), want.end(), [&](auto a, auto b) {
                return key(a) < key(b);
            });
            REQUIRE(got.size() == want.size());
            for (std::size_t i = 0; i < got.size(); ++i)
                CHECK(got[i] == want[i]);
        }
    }
}

TEST_CASE("neighbors match the oracle on a K = 3 lattice") {
    auto L = build_lattice(3, 2, 1);
    for (int j = 0; j <= L.J_max(); ++j)
        for (long l = 0; l < L.sectors(j); l += 5)
            for (auto mode : {NeighborMode::euclidean, NeighborMode::pseudo}) {
                auto got = L.neighbors(j, l, mode, 0.5);
                auto want = neighbors_brute(L, j, l, mode, 0.5);
                CHECK(got.size() == want.size());
            }
}

TEST_CASE("neighbor sets contain the cell itself and stay uniformly bounded") {
    auto max_at_level = [](const DyadicLattice& L, int j, NeighborMode mode,
                           double r) {
        std::size_t mx = 0;
        for (long l = 0; l < L.sectors(j); ++l) {
            auto u = L.neighbors(j, l, mode, r);
            CHECK(std::find(u.begin(), u.end(), CellIndex{j, l}) != u.end());
            mx = std::max(mx, u.size());
        }
        return mx;
    };
    // euclidean mode: observed max is 15, exactly level-independent once two
    // outer levels exist (levels above J_max-2 lose outward neighbors to the
    // truncation)
    auto L6 = build_lattice(2, 6, 1);
    const std::size_t eu3 = max_at_level(L6, 3, NeighborMode::euclidean, 0);
    const std::size_t eu4 = max_at_level(L6, 4, NeighborMode::euclidean, 0);
    CHECK(eu3 == eu4);
    CHECK(eu4 == 15);
    // pseudo(0.9) reaches ~5 levels out, so compare on a deep lattice;
    // sampled set distances make the bound level-stable only within a small
    // band (observed 203 at level 4 vs 202 at level 6)
    auto L11 = build_lattice(2, 11, 1);
    const double ps4 =
        double(max_at_level(L11, 4, NeighborMode::pseudo, 0.9));
    const double ps6 =
        double(max_at_level(L11, 6, NeighborMode::pseudo, 0.9));
    CHECK(std::abs(ps4 / ps6 - 1.0) < 0.02);
    CHECK(ps4 <= 250.0);
}

TEST_CASE("is_separated") {
    const complex pts1[] = {{0, 0}, {0.9, 0}};
    CHECK(is_separated(pts1, 0.5));
    const complex pts2[] = {{0.5, 0}, {0.5, 0}};
    CHECK_FALSE(is_separated(pts2, 1e-12));
}

TEST_CASE("center family is separated, with level-independent margin") {
    auto L = build_lattice(2, 5, 1);
    const auto centers = L.all_centers();
    const double global = L.min_center_separation();
    CHECK(global > 0.0);
    CHECK(is_separated(centers, global * 0.999999));

    // same-level minimum separation for levels 3..5 agrees within 5%
    auto level_min = [&](int j) {
        double best = 1.0;
        for (long l = 0; l < L.sectors(j); ++l)
            for (long m = l + 1; m < L.sectors(j); ++m)
                best = std::min(
                    best, pseudo_distance(L.center(j, l), L.center(j, m)));
        return best;
    };
    const double m3 = level_min(3), m4 = level_min(4), m5 = level_min(5);
    CHECK(std::abs(m4 / m3 - 1.0) < 0.05);
    CHECK(std::abs(m5 / m4 - 1.0) < 0.05);
}

TEST_CASE("min_center_separation matches the exhaustive scan") {
    auto L = build_lattice(2, 4, 1);
    const auto centers = L.all_centers();
    double best = 1.0;
    for (std::size_t i = 0; i < centers.size(); ++i)
        for (std::size_t j = i + 1; j < centers.size(); ++j)
            best = std::min(best, pseudo_distance(centers[i], centers[j]));
    CHECK(L.min_center_separation() == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("csv export schema") {
    auto L = build_lattice(2, 1, 2);
    std::ostringstream os;
    export_lattice_csv(L, os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "j,l,k,r_lo,r_hi,theta_lo,theta_hi,center_re,center_im");
    long rows = 0;
    while (std::getline(is, line))
        if (!line.empty()) ++rows;
    CHECK(rows == L.total_subcells());
}
