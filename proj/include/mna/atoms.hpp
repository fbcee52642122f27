#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mna/common.hpp"
#include "mna/functions.hpp"
#include "mna/lattice.hpp"
#include "mna/parallel.hpp"
#include "mna/sequences.hpp"
#include "mna/weights.hpp"

namespace mna {

struct AtomParameters {
    double p = 2.0, q = 2.0;
    double M_exp = 0.0;   // kernel power for synthesis
    double eta = 0.0;     // parameter system solution, set for 1 < p < inf
    double theta = 0.0;
    double eta_proj = 0.0; // projection index of the S_eta discretization
    int M_sub = 1;
    WeightExponents exps;
};

inline double inv_or_zero(double p) { return p == infinity ? 0.0 : 1.0 / p; }

// Smallest admissible kernel power M > 1 + 1/p + (beta+gamma)/q, taken with
// a 0.5 margin so the strict inequality survives finite-precision exponents.
inline double min_atom_order(double p, double q, const RadialWeight& w) {
    const auto e = w.exponents();
    return 1.0 + inv_or_zero(p) + (e.beta + e.gamma) / q + 0.5;
}

namespace detail {

// The six inequalities of the parameter system; returns 0 if all hold,
// otherwise the 1-based index of the first violated one.
inline int violated_parameter_inequality(double p, double q, double alpha,
                                         double beta, double gamma, double M,
                                         double eta, double theta) {
    const double pc = p / (p - 1.0);
    if (!(M * (1.0 - theta) * pc > 1.0)) return 1;
    if (!(M * (eta - theta) + (1.0 - eta) / p > 0.0)) return 2;
    if (!(pc * (1.0 - eta) * (M - 1.0 / p - beta / q) > 1.0)) return 3;
    if (!(p * M * theta > 1.0)) return 4;
    if (!(q * eta * (M - 1.0 / p) > gamma)) return 5;
    if (!(M * (eta - theta) + (1.0 - eta) / p < alpha * eta / q)) return 6;
    return 0;
}

} // namespace detail

struct EtaTheta {
    double eta = 0.0, theta = 0.0;
};

// Feasible (eta, theta) in (0,1)^2 for the parameter system: eta from the
// midpoint of
//   ( gamma/(q(M-1/p)), min{ 1 - 1/(p'(M-1/p-beta/q)), (M-1)/(M-1/p) } ),
// then theta from the midpoint of
//   ( ((M-1/p-alpha/q) eta + 1/p)/M, ((M-1/p) eta + 1/p)/M ).
// All six inequalities are re-verified numerically before returning.
inline EtaTheta solve_eta_theta(double p, double q, double alpha, double beta,
                                double gamma, double M) {
    if (!(p > 1.0) || p == infinity)
        throw config_error("solve_eta_theta requires 1 < p < infinity");
    if (!(q > 0.0) || q == infinity)
        throw config_error("solve_eta_theta requires 0 < q < infinity");
    if (alpha > beta + 1e-12)
        throw config_error("solve_eta_theta requires alpha <= beta");
    const double pc = p / (p - 1.0);
    const double mp = M - 1.0 / p;
    if (!(mp - beta / q > 0.0))
        throw numerical_error(
            "empty eta interval: inequality 3 of the parameter system cannot "
            "hold (M too small against beta/q)");
    const double eta_lo = gamma / (q * mp);
    const double eta_hi =
        std::min(1.0 - 1.0 / (pc * (mp - beta / q)), (M - 1.0) / mp);
    if (!(eta_lo < eta_hi))
        throw numerical_error(
            "empty eta interval: inequalities 3 and 5 of the parameter system "
            "are incompatible (M below the admissible order)");
    const double eta = 0.5 * (eta_lo + eta_hi);
    const double th_lo = ((mp - alpha / q) * eta + 1.0 / p) / M;
    const double th_hi = (mp * eta + 1.0 / p) / M;
    if (!(th_lo < th_hi))
        throw numerical_error("empty theta interval in the parameter system");
    const double theta = 0.5 * (th_lo + th_hi);
    const int bad = detail::violated_parameter_inequality(p, q, alpha, beta,
                                                          gamma, M, eta, theta);
    if (bad != 0)
        throw numerical_error("parameter system inequality " +
                              std::to_string(bad) + " violated at solution");
    return {eta, theta};
}

// eta_proj defaults to the smallest integer above the admissible atom order:
// integral kernel powers keep the iteration on the fast evaluation path,
// and the space-inclusion requirement eta > beta/q + 1/p - 1 holds a
// fortiori.
inline AtomParameters make_atom_params(double p, double q,
                                       const RadialWeight& w, int M_sub = 1) {
    AtomParameters prm;
    prm.p = p;
    prm.q = q;
    prm.M_sub = M_sub;
    prm.exps = w.exponents();
    prm.M_exp = 1.0 + inv_or_zero(p) + (prm.exps.beta + prm.exps.gamma) / q + 0.5;
    prm.eta_proj = std::max(2.0, std::ceil(prm.M_exp));
    if (p > 1.0 && p < infinity) {
        const auto et = solve_eta_theta(p, q, prm.exps.alpha, prm.exps.beta,
                                        prm.exps.gamma, prm.M_exp);
        prm.eta = et.eta;
        prm.theta = et.theta;
    }
    return prm;
}

// F(z) = sum lambda_i (1-|z_i|)^{M-1/p} what(z_i)^{-1/q} (1-conj(z_i)z)^{-M}
// over the points aligned with the flattened coefficient list.
inline AnalyticFunction synthesize(const std::vector<complex>& coeffs,
                                   const std::vector<complex>& points,
                                   const AtomParameters& prm,
                                   const RadialWeight& w,
                                   double separation_delta = 1e-9,
                                   bool check_separation = true) {
    if (coeffs.size() != points.size())
        throw config_error("synthesize: coefficient/point size mismatch");
    if (check_separation && !is_separated(points, separation_delta))
        throw config_error("sequence not separated");
    AnalyticFunction F;
    const double inv_p = inv_or_zero(prm.p);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (coeffs[i] == 0.0) continue;
        const double d = 1.0 - std::abs(points[i]);
        const double amp = std::pow(d, prm.M_exp - inv_p) *
                           std::pow(w.tail(std::abs(points[i])), -1.0 / prm.q);
        F.add_kernel(points[i], prm.M_exp, coeffs[i] * amp);
    }
    return F;
}

inline AnalyticFunction synthesize(const CoefficientArray& lambda,
                                   const std::vector<complex>& points,
                                   const AtomParameters& prm,
                                   const RadialWeight& w,
                                   double separation_delta = 1e-9,
                                   bool check_separation = true) {
    std::vector<complex> flat;
    for (const auto& row : lambda.rows())
        flat.insert(flat.end(), row.begin(), row.end());
    return synthesize(flat, points, prm, w, separation_delta, check_separation);
}

// Synthesis over the cell centers of L; the center family is separated by
// construction, so the pairwise check is skipped.
inline AnalyticFunction synthesize_on_centers(const CoefficientArray& lambda,
                                              const DyadicLattice& L,
                                              const AtomParameters& prm,
                                              const RadialWeight& w) {
    return synthesize(lambda, L.all_centers(), prm, w, 0.0, false);
}

// Analysis coefficients lambda(f)_{j,l} = K^{-j/p} what(r_j)^{1/q} f_{j,l},
// with f_{j,l} = sup over Q_{j,l} of |f| taken on a grid x grid polar net
// (cell edges included, so the four corners are sampled).
inline CoefficientArray analyze(const AnalyticFunction& f,
                                const DyadicLattice& L, double p, double q,
                                const RadialWeight& w, int sup_grid = 8) {
    if (sup_grid < 4) throw config_error("analyze requires sup_grid >= 4");
    CoefficientArray lam(L, false);
    const double inv_p = inv_or_zero(p);
    for (int j = 0; j <= L.J_max(); ++j) {
        const double scale =
            std::pow(double(L.K()), -double(j) * inv_p) *
            std::pow(w.tail(L.radius(j)), 1.0 / q);
        for (long l = 0; l < L.sectors(j); ++l) {
            const CellBox b = L.box(j, l);
            double sup = 0.0;
            for (int ir = 0; ir < sup_grid; ++ir) {
                const double r =
                    b.r_lo + (b.r_hi - b.r_lo) * double(ir) / double(sup_grid - 1);
                for (int it = 0; it < sup_grid; ++it) {
                    const double t = b.theta_lo + (b.theta_hi - b.theta_lo) *
                                                      double(it) /
                                                      double(sup_grid - 1);
                    sup = std::max(sup, std::abs(f(std::polar(r, t))));
                }
            }
            lam.at(j, l) = scale * sup;
        }
    }
    return lam;
}

struct SEtaResult {
    AnalyticFunction g;
    CoefficientArray a; // a(f)_{j,l,k} = f(center)(1-|center|^2)^{1/p} what(r_j)^{1/q}
};

namespace detail {

// per-subcell constants of the S_eta discretization; areas are normalized so
// the unit disc has measure one, matching the reproducing identity of the
// projection the operator discretizes
struct SEtaTable {
    std::vector<complex> centers;
    std::vector<double> kernel_base; // (eta+1)(1-|c|^2)^eta |Q^k|/pi
    std::vector<double> a_base;      // (1-|c|^2)^{1/p} what(r_j)^{1/q}
    std::vector<int> level;
};

inline SEtaTable make_seta_table(const DyadicLattice& L,
                                 const AtomParameters& prm,
                                 const RadialWeight& w) {
    SEtaTable T;
    const double eta = prm.eta_proj;
    const double inv_p = inv_or_zero(prm.p);
    const int m2 = L.M_sub() * L.M_sub();
    T.centers.reserve(L.total_subcells());
    for (int j = 0; j <= L.J_max(); ++j) {
        const double wq = std::pow(w.tail(L.radius(j)), 1.0 / prm.q);
        for (long l = 0; l < L.sectors(j); ++l) {
            const double area = L.subcell_area(j, l) / pi;
            for (int k = 1; k <= m2; ++k) {
                const complex c = L.subcell_center(j, l, k);
                const double d = 1.0 - std::norm(c);
                T.centers.push_back(c);
                T.kernel_base.push_back((eta + 1.0) * std::pow(d, eta) * area);
                T.a_base.push_back(std::pow(d, inv_p) * wq);
                T.level.push_back(j);
            }
        }
    }
    return T;
}

} // namespace detail

// S_eta(f)(z) = (eta+1) sum f(c)(1-|c|^2)^eta (1-conj(c)z)^{-(eta+2)} |Q^k|
// over all subcells, plus the coefficient family a(f).
inline SEtaResult apply_S_eta(const AnalyticFunction& f, const DyadicLattice& L,
                              const AtomParameters& prm, const RadialWeight& w) {
    const double eta = prm.eta_proj;
    if (!(eta > prm.exps.beta / prm.q + inv_or_zero(prm.p) - 1.0))
        throw config_error(
            "eta_proj must exceed beta/q + 1/p - 1 for the space inclusion");
    const auto T = detail::make_seta_table(L, prm, w);
    SEtaResult out{AnalyticFunction{}, CoefficientArray(L, true)};
    const int m2 = L.M_sub() * L.M_sub();
    std::size_t i = 0;
    for (int j = 0; j <= L.J_max(); ++j)
        for (long l = 0; l < L.sectors(j); ++l)
            for (int k = 1; k <= m2; ++k, ++i) {
                const complex fv = f(T.centers[i]);
                if (fv != 0.0)
                    out.g.add_kernel(T.centers[i], eta + 2.0,
                                     fv * T.kernel_base[i]);
                out.a.at(j, l, k) = fv * T.a_base[i];
            }
    return out;
}

struct DecompositionResult {
    CoefficientArray b;      // accumulated a-coefficients, triple-indexed
    CoefficientArray lambda; // representation-normalized coefficients
    std::vector<double> residual_history; // [0] = ||f||, then per iteration
    AnalyticFunction reconstruction;
    double coefficient_norm = 0.0;    // ||lambda||_{l^{p,q}}
    double reconstruction_error = 0.0; // ||f - g|| / ||f||
    bool aborted = false;
    std::string diagnostic;
};

// Iterates f_1 = S_eta(f), f_n = S_eta(f - sum_{m<n} f_m), accumulating
// b = sum_n a^{(n)}. The truncated lattice replaces the infinite sums, so
// contraction is a measured trend; if the residual norm grows on three
// consecutive iterations the run aborts with a diagnostic instead of
// looping on a non-contracting configuration.
inline DecompositionResult atomic_decompose(const AnalyticFunction& f,
                                            const DyadicLattice& L,
                                            const AtomParameters& prm,
                                            const RadialWeight& w, int n_iter,
                                            const QuadratureConfig& quad = {},
                                            unsigned threads = 1) {
    if (n_iter < 1) throw config_error("atomic_decompose requires n_iter >= 1");
    const double eta = prm.eta_proj;
    if (!(eta > prm.exps.beta / prm.q + inv_or_zero(prm.p) - 1.0))
        throw config_error(
            "eta_proj must exceed beta/q + 1/p - 1 for the space inclusion");
    const auto T = detail::make_seta_table(L, prm, w);
    const std::size_t n_cells = T.centers.size();
    const double Mk = eta + 2.0;
    (void)threads; // ring evaluation is cheap enough single-threaded

    const std::vector<complex> f_at = evaluate_on_subcell_centers(f, L);

    std::vector<complex> acc(n_cells, complex{0.0, 0.0}); // kernel coefficients
    std::vector<complex> b(n_cells, complex{0.0, 0.0});

    DecompositionResult out;
    out.residual_history.push_back(mixed_norm(f, prm.p, prm.q, w, L, quad));

    auto accumulated_function = [&]() {
        AnalyticFunction g;
        for (std::size_t i = 0; i < n_cells; ++i)
            if (acc[i] != 0.0) g.add_kernel(T.centers[i], Mk, acc[i]);
        return g;
    };

    int rising = 0;
    for (int n = 1; n <= n_iter; ++n) {
        // g_{n-1} = f - sum_{m<n} f_m at the subcell centers
        std::vector<complex> vals = f_at;
        if (n > 1) {
            const auto acc_at =
                evaluate_on_subcell_centers(accumulated_function(), L);
            for (std::size_t i = 0; i < n_cells; ++i) vals[i] -= acc_at[i];
        }
        for (std::size_t i = 0; i < n_cells; ++i) {
            acc[i] += T.kernel_base[i] * vals[i];
            b[i] += T.a_base[i] * vals[i];
        }
        const double res = mixed_norm(f - accumulated_function(), prm.p, prm.q,
                                      w, L, quad);
        out.residual_history.push_back(res);
        rising = res > out.residual_history[n - 1] ? rising + 1 : 0;
        if (rising >= 3) {
            out.aborted = true;
            out.diagnostic = "M_sub too small for contraction";
            break;
        }
    }

    out.b = CoefficientArray(L, true);
    out.lambda = CoefficientArray(L, true);
    const int m2 = L.M_sub() * L.M_sub();
    std::size_t i = 0;
    for (int j = 0; j <= L.J_max(); ++j)
        for (long l = 0; l < L.sectors(j); ++l) {
            const double area = L.subcell_area(j, l) / pi;
            for (int k = 1; k <= m2; ++k, ++i) {
                out.b.at(j, l, k) = b[i];
                const double d = 1.0 - std::norm(T.centers[i]);
                out.lambda.at(j, l, k) = (eta + 1.0) * b[i] * area / (d * d);
            }
        }

    // reconstruction per the representation with M = eta + 2; algebraically
    // identical to the accumulated kernel sum
    const double inv_p = inv_or_zero(prm.p);
    i = 0;
    for (int j = 0; j <= L.J_max(); ++j) {
        const double wq = std::pow(w.tail(L.radius(j)), -1.0 / prm.q);
        for (long l = 0; l < L.sectors(j); ++l)
            for (int k = 1; k <= m2; ++k, ++i) {
                const complex lam = out.lambda.at(j, l, k);
                if (lam == 0.0) continue;
                const double d = 1.0 - std::norm(T.centers[i]);
                out.reconstruction.add_kernel(
                    T.centers[i], Mk, lam * std::pow(d, Mk - inv_p) * wq);
            }
    }

    out.coefficient_norm = lpq_norm(out.lambda, prm.p, prm.q);
    out.reconstruction_error =
        out.residual_history[0] > 0.0
            ? out.residual_history.back() / out.residual_history[0]
            : 0.0;
    return out;
}

} // namespace mna
