#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mna/common.hpp"
#include "mna/sequences.hpp"
#include "mna/weights.hpp"

namespace mna {

// Positive step function on [0, N): value[k] on [k, k+1).
struct StepWeight {
    std::vector<double> values;

    explicit StepWeight(std::vector<double> v = {}) : values(std::move(v)) {
        for (double x : values)
            if (!(x > 0.0) || !std::isfinite(x))
                throw config_error("step weight values must be positive finite");
    }

    std::size_t size() const { return values.size(); }

    StepWeight scaled(double c) const {
        StepWeight s = *this;
        for (double& v : s.values) v *= c;
        return s;
    }
};

struct MuckenhouptResult {
    double sup = 0.0;
    bool truncation_limited = false; // sup attained in the last two intervals
    int argmax_interval = 0;
};

namespace detail {

// sup over t in [0,1] of (A + a t)^{1/s} (B - b t)^{1/s'}: both factors are
// linear, so the single critical point is closed-form; endpoints and eight
// interior samples are kept as a floor.
inline double interval_sup(double A, double a, double B, double b, double s,
                           double sc) {
    auto F = [&](double t) {
        const double x = A + a * t, y = B - b * t;
        if (!(x > 0.0) || !(y > 0.0)) return 0.0;
        return std::pow(x, 1.0 / s) * std::pow(y, 1.0 / sc);
    };
    double best = std::max(F(0.0), F(1.0));
    for (int i = 1; i <= 8; ++i) best = std::max(best, F(i / 9.0));
    if (a != 0.0 && b != 0.0) {
        const double t = (a * B / s - b * A / sc) / (a * b);
        if (t > 0.0 && t < 1.0) best = std::max(best, F(t));
    }
    return best;
}

} // namespace detail

// sup_x (int_0^x U^s)^{1/s} (int_x^infty V^{-s'})^{1/s'} for the truncated
// step weights; exact on the piecewise-linear structure.
inline MuckenhouptResult muckenhoupt_A(const StepWeight& U, const StepWeight& V,
                                       double s) {
    if (U.size() != V.size())
        throw config_error("muckenhoupt_A requires equal step-weight lengths");
    if (!(s > 1.0)) throw config_error("muckenhoupt conditions require s > 1");
    const double sc = conjugate_exponent(s);
    const int N = static_cast<int>(U.size());
    MuckenhouptResult out;
    double prefix = 0.0; // int_0^k U^s
    std::vector<double> suffix(N + 1, 0.0);
    for (int k = N - 1; k >= 0; --k)
        suffix[k] = suffix[k + 1] + std::pow(V.values[k], -sc);
    for (int k = 0; k < N; ++k) {
        const double us = std::pow(U.values[k], s);
        const double vs = std::pow(V.values[k], -sc);
        const double cand = detail::interval_sup(prefix, us, suffix[k], vs, s, sc);
        if (std::isfinite(cand) && cand > out.sup) {
            out.sup = cand;
            out.argmax_interval = k;
        }
        prefix += us;
    }
    out.truncation_limited = out.argmax_interval >= N - 2;
    return out;
}

// mirror with the integral limits swapped:
// sup_x (int_x^infty U^s)^{1/s} (int_0^x V^{-s'})^{1/s'}
inline MuckenhouptResult muckenhoupt_B(const StepWeight& U, const StepWeight& V,
                                       double s) {
    if (U.size() != V.size())
        throw config_error("muckenhoupt_B requires equal step-weight lengths");
    if (!(s > 1.0)) throw config_error("muckenhoupt conditions require s > 1");
    const double sc = conjugate_exponent(s);
    const int N = static_cast<int>(U.size());
    MuckenhouptResult out;
    std::vector<double> suffix(N + 1, 0.0);
    for (int k = N - 1; k >= 0; --k)
        suffix[k] = suffix[k + 1] + std::pow(U.values[k], s);
    double prefix = 0.0; // int_0^k V^{-s'}
    for (int k = 0; k < N; ++k) {
        const double us = std::pow(U.values[k], s);
        const double vs = std::pow(V.values[k], -sc);
        // (suffix - t us)^{1/s} (prefix + t vs)^{1/s'}
        const double cand =
            detail::interval_sup(prefix, vs, suffix[k], us, sc, s);
        if (std::isfinite(cand) && cand > out.sup) {
            out.sup = cand;
            out.argmax_interval = k;
        }
        prefix += vs;
    }
    out.truncation_limited = out.argmax_interval >= N - 2;
    return out;
}

enum class ProofCase { s1_12, s2_12, s5_22, s6_22, s7_32, s8_32 };

inline const char* to_string(ProofCase c) {
    switch (c) {
        case ProofCase::s1_12: return "1.2-S1";
        case ProofCase::s2_12: return "1.2-S2";
        case ProofCase::s5_22: return "2.2-S5";
        case ProofCase::s6_22: return "2.2-S6";
        case ProofCase::s7_32: return "3.2-S7";
        default: return "3.2-S8";
    }
}

inline ProofCase proof_case_from_string(const std::string& s) {
    if (s == "1.2-S1") return ProofCase::s1_12;
    if (s == "1.2-S2") return ProofCase::s2_12;
    if (s == "2.2-S5") return ProofCase::s5_22;
    if (s == "2.2-S6") return ProofCase::s6_22;
    if (s == "3.2-S7") return ProofCase::s7_32;
    if (s == "3.2-S8") return ProofCase::s8_32;
    throw config_error("unknown proof case: " + s);
}

struct ProofSteps {
    StepWeight U, V, f;
    double s = 0.0;   // Hardy exponent: q/p for the 1.2/2.2 cases, q for 3.2
    char side = 'A';  // which Muckenhoupt condition applies
};

// The step weights of the six estimate cases on r_k = 1 - K^{-k}, truncated
// to N steps. The f column carries the display's step function with a unit
// coefficient profile (c_k = 1 resp. lambda(k) = 1).
inline ProofSteps build_proof_steps(ProofCase pc, const RadialWeight& w, int K,
                                    double p, double q, double M_exp,
                                    double eta, double theta, int N) {
    if (K < 2) throw config_error("build_proof_steps requires K >= 2");
    if (N < 4) throw config_error("build_proof_steps requires N >= 4");
    const bool case12 = pc == ProofCase::s1_12 || pc == ProofCase::s2_12;
    const bool case22 = pc == ProofCase::s5_22 || pc == ProofCase::s6_22;
    const bool case32 = pc == ProofCase::s7_32 || pc == ProofCase::s8_32;
    if (case12 && !(p > 0.0 && p <= 1.0 && p < q))
        throw config_error("Case 1.2 requires 0 < p <= 1 and 1 < q/p");
    if (case22) {
        if (!(p > 1.0 && p != infinity && p < q && q < infinity))
            throw config_error("Case 2.2 requires 1 < p < q < infinity");
        if (!(eta > 0.0 && eta < 1.0 && theta > 0.0 && theta < 1.0))
            throw config_error(
                "Case 2.2 requires (eta, theta) from the parameter system");
    }
    if (case32 && !(p == infinity && q > 1.0 && q < infinity))
        throw config_error("Case 3.2 requires p = infinity and 1 < q < infinity");

    std::vector<double> U(N), f(N);
    for (int k = 0; k < N; ++k) {
        const double one_minus_rk = std::pow(double(K), -k);
        const double hat = w.tail_at_one_minus(one_minus_rk);
        double u = 0.0;
        switch (pc) {
            case ProofCase::s1_12:
                u = std::pow(hat, p / q) / std::pow(one_minus_rk, p * M_exp - 1.0);
                break;
            case ProofCase::s2_12:
                u = std::pow(hat, p / q);
                break;
            case ProofCase::s5_22:
                u = std::pow(hat, p * eta / q) /
                    std::pow(one_minus_rk, eta * (p * M_exp - 1.0));
                break;
            case ProofCase::s6_22:
                u = std::pow(hat, p * eta / q) /
                    std::pow(one_minus_rk,
                             p * M_exp * (eta - theta) + 1.0 - eta);
                break;
            case ProofCase::s7_32:
                u = std::pow(hat, 1.0 / q) / std::pow(one_minus_rk, M_exp - 1.0);
                break;
            case ProofCase::s8_32:
                u = std::pow(hat, 1.0 / q);
                break;
        }
        U[k] = u;
        f[k] = 1.0 / u;
    }
    ProofSteps out{StepWeight(U), StepWeight(U), StepWeight(f), 0.0, 'A'};
    out.s = case32 ? q : q / p;
    const bool sideA = pc == ProofCase::s1_12 || pc == ProofCase::s5_22 ||
                       pc == ProofCase::s7_32;
    out.side = sideA ? 'A' : 'B';
    return out;
}

} // namespace mna
