#pragma once

#include <array>
#include <cmath>
#include <cstdint>

#include "mna/common.hpp"

namespace mna {

// 16-point Gauss-Legendre rule on [-1,1].
inline constexpr std::array<double, 8> gl16_nodes = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
inline constexpr std::array<double, 8> gl16_weights = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

template <class F>
double gauss16(F&& f, double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 8; ++i) {
        const double x = h * gl16_nodes[i];
        s += gl16_weights[i] * (f(c - x) + f(c + x));
    }
    return h * s;
}

struct TailIntegral {
    double value = 0.0;
    bool converged = true;
    double last_piece = 0.0;
    int pieces = 0;
};

// Integral of f over [a,b] with b <= 1, on dyadic subintervals accumulating
// toward b. b = 1 is treated as an open endpoint (the integrand may be
// singular there): pieces never touch it and the recursion stops once a
// piece falls below rel_tol of the running total or the resolution is
// exhausted. For b < 1 the final sliver [left,b] is closed with one panel.
template <class F>
TailIntegral integrate_dyadic_toward(F&& f, double a, double b,
                                     double rel_tol = 1e-12,
                                     int max_pieces = 80) {
    TailIntegral out;
    if (!(a < b)) return out;
    const bool open_end = b >= 1.0;
    double left = a;
    const double len = b - a;
    double prev_piece = 0.0;
    // pieces of an endpoint power law decay geometrically; the unresolved
    // remainder at the open end is closed by summing that geometric series
    auto extrapolated_tail = [&]() {
        if (out.pieces < 3 || !(prev_piece > 0.0)) return 0.0;
        const double rho = out.last_piece / prev_piece;
        if (!(rho > 0.0) || rho > 0.95) return 0.0;
        return out.last_piece * rho / (1.0 - rho);
    };
    for (int i = 0; i < max_pieces; ++i) {
        const double right = b - len * std::ldexp(1.0, -(i + 1));
        // Past ~2^-33 from an open endpoint, 1-s cancels catastrophically in
        // the integrand; the geometric tail model is exact for power-law
        // singularities, so stop there and extrapolate.
        const bool exhausted =
            right <= left || right >= b || (open_end && b - right < 1.2e-10);
        if (exhausted) {
            if (!open_end && left < b) {
                out.value += gauss16(f, left, b);
            } else {
                const double tail = extrapolated_tail();
                out.value += tail;
                // a skipped tail with non-negligible pieces means the
                // integral has not settled at this resolution
                if (tail == 0.0 &&
                    std::abs(out.last_piece) > 1e-8 * std::abs(out.value))
                    out.converged = false;
            }
            return out;
        }
        const double piece = gauss16(f, left, right);
        out.value += piece;
        prev_piece = out.last_piece;
        out.last_piece = piece;
        out.pieces = i + 1;
        left = right;
        if (i > 2 && std::abs(piece) < rel_tol * std::abs(out.value)) {
            if (!open_end)
                out.value += gauss16(f, left, b);
            else
                out.value += extrapolated_tail();
            return out;
        }
    }
    if (!open_end) {
        out.value += gauss16(f, left, b);
        return out;
    }
    out.converged = std::abs(out.last_piece) <= 1e-8 * std::abs(out.value);
    if (out.converged) out.value += extrapolated_tail();
    return out;
}

// Least-squares slope of y against 0,1,...,n-1.
inline double fit_slope(const double* y, int n) {
    if (n < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sx += i;
        sy += y[i];
        sxx += double(i) * i;
        sxy += double(i) * y[i];
    }
    const double den = n * sxx - sx * sx;
    return den == 0 ? 0.0 : (n * sxy - sx * sy) / den;
}

} // namespace mna
