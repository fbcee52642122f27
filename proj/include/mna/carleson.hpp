#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "mna/atoms.hpp"
#include "mna/common.hpp"
#include "mna/functions.hpp"
#include "mna/lattice.hpp"
#include "mna/parallel.hpp"
#include "mna/sequences.hpp"
#include "mna/weights.hpp"

namespace mna {

// Exponent case table for the differentiation operator D^(n): the tag picks
// (u, v) in T_{r,u,v}(z) = mu(Delta(z,r)) / ((1-|z|)^u what(z)^v).
// Ties follow the listed non-strict inequalities.
enum class CarlesonCase { a, b, c, d };

struct CarlesonConfig {
    double p = 2.0, q = 2.0, s = 1.0;
    int n = 0;
    double r = 0.5;
    CarlesonCase case_tag = CarlesonCase::a;
    double u = 0.0, v = 0.0;

    static CarlesonConfig make(double p, double q, double s, int n = 0,
                               double r = 0.5) {
        if (!(p > 0.0) || !(q > 0.0) || !(s > 0.0) || p == infinity ||
            q == infinity || s == infinity)
            throw config_error("carleson exponents must lie in (0, infinity)");
        if (n < 0) throw config_error("derivative order must be >= 0");
        if (!(r > 0.0 && r < 1.0))
            throw config_error("pseudohyperbolic radius must lie in (0,1)");
        CarlesonConfig c{p, q, s, n, r};
        if (s < p && s < q) {
            c.case_tag = CarlesonCase::a;
            c.u = s * n + 1.0;
            c.v = 1.0;
        } else if (p <= s && s < q) {
            c.case_tag = CarlesonCase::b;
            c.u = s * n + 1.0 / p;
            c.v = 1.0;
        } else if (q <= s && s < p) {
            c.case_tag = CarlesonCase::c;
            c.u = s * n + 1.0;
            c.v = s / q;
        } else {
            c.case_tag = CarlesonCase::d;
            c.u = s * (n + 1.0 / p);
            c.v = s / q;
        }
        return c;
    }

    double inner_exponent() const { return conjugate_exponent(p / s); }
    double outer_exponent() const { return conjugate_exponent(q / s); }
};

inline const char* to_string(CarlesonCase c) {
    switch (c) {
        case CarlesonCase::a: return "a";
        case CarlesonCase::b: return "b";
        case CarlesonCase::c: return "c";
        default: return "d";
    }
}

inline double T_function(const DiscreteMeasure& mu, const RadialWeight& w,
                         const CarlesonConfig& cfg, complex z) {
    const double az = std::abs(z);
    if (az >= 1.0) throw config_error("T_function requires |z| < 1");
    const double m = mu.ball_mass(z, cfg.r);
    if (m == 0.0) return 0.0;
    return m / (std::pow(1.0 - az, cfg.u) * std::pow(w.tail(az), cfg.v));
}

struct ConditionII {
    CoefficientArray sequence;
    double norm = 0.0;
};

// {mu(Q_{j,l}) K^{s j (n + 1/p)} what(r_j)^{-s/q}}_{j,l} in the
// l^{(p/s)',(q/s)'} norm. Masses must lie inside the truncated lattice.
inline ConditionII condition_ii(const DiscreteMeasure& mu,
                                const DyadicLattice& L, const RadialWeight& w,
                                const CarlesonConfig& cfg) {
    CoefficientArray cellmass(L, false);
    for (const auto& pm : mu.points()) {
        if (std::abs(pm.z) >= L.truncation_radius())
            throw config_error(
                "measure mass outside the lattice at z = (" +
                std::to_string(pm.z.real()) + ", " + std::to_string(pm.z.imag()) +
                ")");
        const CellIndex c = L.locate(pm.z);
        cellmass.at(c.j, c.l) += pm.mass;
    }
    ConditionII out;
    out.sequence = CoefficientArray(L, false);
    for (int j = 0; j <= L.J_max(); ++j) {
        const double scale =
            std::pow(double(L.K()), cfg.s * double(j) * (cfg.n + 1.0 / cfg.p)) *
            std::pow(w.tail(L.radius(j)), -cfg.s / cfg.q);
        for (long l = 0; l < L.sectors(j); ++l)
            out.sequence.at(j, l) = cellmass.at(j, l).real() * scale;
    }
    out.norm = lpq_norm(out.sequence, cfg.inner_exponent(), cfg.outer_exponent());
    return out;
}

// Mixed Lebesgue norm of z -> T_{r,u,v}(z) with exponents ((p/s)', (q/s)')
// and weight w: normalized circle means per radius, Gauss nodes per dyadic
// annulus, sups over samples for infinite exponents. The radial grid runs a
// few levels past the lattice truncation to catch the pseudohyperbolic
// spill-over of masses near the rim.
inline double condition_iii(const DiscreteMeasure& mu, const RadialWeight& w,
                            const DyadicLattice& L, const CarlesonConfig& cfg,
                            int grid = 256, int nodes_per_annulus = 8,
                            int extra_levels = 5) {
    const double a_exp = cfg.inner_exponent();
    const double b_exp = cfg.outer_exponent();
    const double K = double(L.K());

    auto circle_mean = [&](double r) {
        if (a_exp == infinity) {
            double m = 0.0;
            for (int k = 0; k < grid; ++k)
                m = std::max(m, T_function(mu, w, cfg,
                                           std::polar(r, 2.0 * pi * k / grid)));
            return m;
        }
        double acc = 0.0;
        for (int k = 0; k < grid; ++k)
            acc += std::pow(
                T_function(mu, w, cfg, std::polar(r, 2.0 * pi * k / grid)),
                a_exp);
        return std::pow(acc / double(grid), 1.0 / a_exp);
    };

    const int levels = L.J_max() + 1 + extra_levels;
    if (b_exp == infinity) {
        double m = 0.0;
        for (int j = 0; j < levels; ++j) {
            const double a = 1.0 - std::pow(K, -j);
            const double b = 1.0 - std::pow(K, -(j + 1));
            for (int i = 0; i < nodes_per_annulus; ++i) {
                const double r =
                    a + (b - a) * (double(i) + 0.5) / double(nodes_per_annulus);
                m = std::max(m, circle_mean(r));
            }
        }
        return m;
    }
    double total = 0.0;
    for (int j = 0; j < levels; ++j) {
        const double a = 1.0 - std::pow(K, -j);
        const double b = 1.0 - std::pow(K, -(j + 1));
        auto node = [&](double r) {
            return std::pow(circle_mean(r), b_exp) * w.density(r);
        };
        static constexpr std::array<double, 4> xn = {
            0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
            0.9602898564975363};
        static constexpr std::array<double, 4> wn = {
            0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
            0.1012285362903763};
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double piece = 0.0;
        for (int i = 0; i < 4; ++i)
            piece += wn[i] * (node(c - h * xn[i]) + node(c + h * xn[i]));
        total += piece * h;
    }
    return std::pow(total, 1.0 / b_exp);
}

// Test family for the operator-norm lower bound: unit atoms at the lattice
// centers (order M from the admissible threshold), the constant function,
// and seeded random-sign coefficient draws synthesized over the centers.
// The A^{p,q}_w norms depend only on (w, L, p, q), so one family serves
// every measure.
class AtomTestFamily {
public:
    AtomTestFamily(const DyadicLattice& L, const RadialWeight& w, double p,
                   double q, int trials, std::uint64_t seed,
                   const QuadratureConfig& quad = {}, unsigned threads = 1) {
        AtomParameters prm;
        prm.p = p;
        prm.q = q;
        prm.exps = w.exponents();
        prm.M_exp = min_atom_order(p, q, w);

        funcs_.push_back(AnalyticFunction::constant(1.0));
        const auto centers = L.all_centers();
        const double inv_p = inv_or_zero(p);
        for (const complex& c : centers) {
            const double amp = std::pow(1.0 - std::abs(c), prm.M_exp - inv_p) *
                               std::pow(w.tail(std::abs(c)), -1.0 / q);
            funcs_.push_back(AnalyticFunction::kernel(c, prm.M_exp, amp));
        }
        for (int t = 0; t < trials; ++t) {
            std::mt19937_64 rng(seed * 0x9e3779b97f4a7c15ull + t + 1);
            std::vector<complex> coeffs(centers.size());
            for (auto& c : coeffs)
                c = (rng() & 1u) ? complex{1.0, 0.0} : complex{-1.0, 0.0};
            funcs_.push_back(synthesize(coeffs, centers, prm, w, 0.0, false));
        }
        norms_.assign(funcs_.size(), 0.0);
        parallel_for(funcs_.size(), threads, [&](std::size_t i) {
            norms_[i] = mixed_norm(funcs_[i], p, q, w, L, quad);
        });
    }

    // max over the family of ||f^{(n)}||_{L^s_mu} / ||f||_{A^{p,q}_w}
    double lower_bound(const DiscreteMeasure& mu, double s, int n) const {
        double best = 0.0;
        for (std::size_t i = 0; i < funcs_.size(); ++i) {
            if (!(norms_[i] > 0.0)) continue;
            best = std::max(best, lebesgue_norm(funcs_[i], s, mu, n) / norms_[i]);
        }
        return best;
    }

    std::size_t size() const { return funcs_.size(); }

private:
    std::vector<AnalyticFunction> funcs_;
    std::vector<double> norms_;
};

// Empirical lower bound for ||D^(n)||_{A^{p,q}_w -> L^s_mu}; deterministic
// given the seed, and nondecreasing in the trial count.
inline double estimate_operator_norm(const DiscreteMeasure& mu,
                                     const RadialWeight& w,
                                     const DyadicLattice& L,
                                     const CarlesonConfig& cfg, int trials = 10,
                                     std::uint64_t seed = 1,
                                     const QuadratureConfig& quad = {},
                                     unsigned threads = 1) {
    if (trials < 10)
        throw config_error("estimate_operator_norm requires trials >= 10");
    AtomTestFamily fam(L, w, cfg.p, cfg.q, trials, seed, quad, threads);
    return fam.lower_bound(mu, cfg.s, cfg.n);
}

struct EquivalenceReport {
    double opnorm_lower = 0.0;
    double opnorm_lower_pow_s = 0.0;
    double cond_ii_norm = 0.0;
    double cond_iii_norm = 0.0;
    double ratio_ii_iii = 0.0;
    double ratio_op_ii = 0.0;
    bool boundedness_certified = false; // opnorm_lower^s <= 10 * cond_ii
    CarlesonConfig cfg;
};

inline EquivalenceReport equivalence_report(const DiscreteMeasure& mu,
                                            const RadialWeight& w,
                                            const DyadicLattice& L,
                                            const CarlesonConfig& cfg,
                                            int trials = 10,
                                            std::uint64_t seed = 1,
                                            const QuadratureConfig& quad = {},
                                            unsigned threads = 1) {
    EquivalenceReport rep;
    rep.cfg = cfg;
    rep.cond_ii_norm = condition_ii(mu, L, w, cfg).norm;
    rep.cond_iii_norm = condition_iii(mu, w, L, cfg);
    rep.opnorm_lower =
        estimate_operator_norm(mu, w, L, cfg, trials, seed, quad, threads);
    rep.opnorm_lower_pow_s = std::pow(rep.opnorm_lower, cfg.s);
    rep.ratio_ii_iii = rep.cond_iii_norm > 0.0
                           ? rep.cond_ii_norm / rep.cond_iii_norm
                           : (rep.cond_ii_norm > 0.0 ? infinity : 1.0);
    rep.ratio_op_ii = rep.cond_ii_norm > 0.0
                          ? rep.opnorm_lower_pow_s / rep.cond_ii_norm
                          : (rep.opnorm_lower_pow_s > 0.0 ? infinity : 0.0);
    rep.boundedness_certified =
        rep.opnorm_lower_pow_s <= 10.0 * rep.cond_ii_norm ||
        (rep.opnorm_lower_pow_s == 0.0 && rep.cond_ii_norm == 0.0);
    return rep;
}

} // namespace mna
