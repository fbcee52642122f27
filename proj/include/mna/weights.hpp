#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "mna/common.hpp"
#include "mna/quadrature.hpp"

namespace mna {

struct DoublingReport {
    bool member = false;
    double constant = 0.0; // C_hat for the upper class, C_check for the lower
};

struct WeightExponents {
    double alpha = 0.0; // lower-class decay exponent, deflated for strictness
    double beta = 0.0;  // upper-class growth exponent, inflated
    double gamma = 0.0; // tail-integral exponent, inflated
};

namespace detail {

// Fritsch-Carlson monotone cubic through (x_i, y_i). Constant beyond the
// last knot, so tables that stop short of r = 1 still define an integrable
// density on [0,1).
class MonotoneCubic {
public:
    MonotoneCubic() = default;
    explicit MonotoneCubic(std::vector<std::pair<double, double>> knots) {
        std::sort(knots.begin(), knots.end());
        for (auto& [x, y] : knots) {
            xs_.push_back(x);
            ys_.push_back(y);
        }
        const std::size_t n = xs_.size();
        if (n < 2) {
            slopes_.assign(n, 0.0);
            return;
        }
        std::vector<double> d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i)
            d[i] = (ys_[i + 1] - ys_[i]) / (xs_[i + 1] - xs_[i]);
        slopes_.assign(n, 0.0);
        slopes_[0] = d[0];
        slopes_[n - 1] = d[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i)
            slopes_[i] = (d[i - 1] * d[i] <= 0.0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (d[i] == 0.0) {
                slopes_[i] = slopes_[i + 1] = 0.0;
                continue;
            }
            const double a = slopes_[i] / d[i], b = slopes_[i + 1] / d[i];
            const double s = a * a + b * b;
            if (s > 9.0) {
                const double t = 3.0 / std::sqrt(s);
                slopes_[i] = t * a * d[i];
                slopes_[i + 1] = t * b * d[i];
            }
        }
    }

    double operator()(double x) const {
        if (xs_.empty()) return 0.0;
        if (x <= xs_.front()) return ys_.front();
        if (x >= xs_.back()) return ys_.back();
        std::size_t i =
            std::upper_bound(xs_.begin(), xs_.end(), x) - xs_.begin() - 1;
        const double h = xs_[i + 1] - xs_[i];
        const double t = (x - xs_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        return ys_[i] * (2 * t3 - 3 * t2 + 1) + h * slopes_[i] * (t3 - 2 * t2 + t) +
               ys_[i + 1] * (-2 * t3 + 3 * t2) + h * slopes_[i + 1] * (t3 - t2);
    }

private:
    std::vector<double> xs_, ys_, slopes_;
};

} // namespace detail

// Radial weight w(r) on [0,1) with tail integral what(r) = int_r^1 w.
// Immutable; all queries are pure and safe to call concurrently.
class RadialWeight {
public:
    enum class Kind { standard_power, table, custom };

    // w(r) = (1+a)(1-r)^a, normalized so that what(r) = (1-r)^{1+a}.
    static RadialWeight standard_power(double a) {
        if (a <= -1.0)
            throw config_error("standard-power weight requires a > -1");
        RadialWeight w;
        w.kind_ = Kind::standard_power;
        w.power_a_ = a;
        w.density_ = [a](double r) { return (1.0 + a) * std::pow(1.0 - r, a); };
        w.tail_ = [a](double r) { return std::pow(1.0 - r, 1.0 + a); };
        w.tail_u_ = [a](double u) { return std::pow(u, 1.0 + a); };
        return w;
    }

    // tail_u, when given, evaluates what at r = 1-u without forming 1-u-1
    // cancellations; used by the deep geometric grids.
    static RadialWeight custom(std::function<double(double)> density,
                               std::function<double(double)> tail = nullptr,
                               std::function<double(double)> tail_u = nullptr) {
        RadialWeight w;
        w.kind_ = Kind::custom;
        w.density_ = std::move(density);
        w.tail_ = std::move(tail);
        w.tail_u_ = std::move(tail_u);
        return w;
    }

    static RadialWeight from_table(std::vector<std::pair<double, double>> knots) {
        if (knots.size() < 2)
            throw config_error("table weight requires at least two knots");
        for (auto& [r, v] : knots)
            if (r < 0.0 || r >= 1.0 || v < 0.0)
                throw config_error("table weight knots need r in [0,1) and w >= 0");
        RadialWeight w;
        w.kind_ = Kind::table;
        auto interp = detail::MonotoneCubic(std::move(knots));
        w.density_ = [interp](double r) { return std::max(0.0, interp(r)); };
        return w;
    }

    Kind kind() const { return kind_; }
    double power_exponent() const { return power_a_; }
    bool has_closed_tail() const { return static_cast<bool>(tail_); }

    double density(double r) const { return density_(r); }

    // what(r) = int_r^1 w(s) ds; closed form when available, otherwise
    // adaptive dyadic Gauss quadrature at 1e-10 relative tolerance.
    double tail(double r) const {
        if (r < 0.0 || r >= 1.0)
            throw config_error("omega_hat requires r in [0,1)");
        if (tail_) return tail_(r);
        auto res = integrate_dyadic_toward(density_, r, 1.0, 1e-11, 80);
        if (!res.converged)
            throw numerical_error("weight not integrable near 1");
        return res.value;
    }

    // what at r = 1 - u for u possibly far below the spacing of doubles
    // around 1
    double tail_at_one_minus(double u) const {
        if (!(u > 0.0) || u > 1.0)
            throw config_error("tail_at_one_minus requires u in (0,1]");
        if (tail_u_) return tail_u_(u);
        const double r = 1.0 - u;
        if (!(r < 1.0))
            throw numerical_error(
                "tail below floating-point floor; reduce r_samples");
        return tail(r);
    }

    // Returns a copy carrying cached doubling exponents; exponents() on the
    // copy is then a plain read. On a weight without the cache, exponents()
    // re-runs the estimator each call (pure, hence concurrent-safe).
    RadialWeight analyzed() const;
    WeightExponents exponents() const;
    bool has_exponents() const { return exps_.has_value(); }

private:
    Kind kind_ = Kind::custom;
    double power_a_ = 0.0;
    std::function<double(double)> density_;
    std::function<double(double)> tail_;
    std::function<double(double)> tail_u_;
    std::optional<WeightExponents> exps_;
};

inline double omega_hat(const RadialWeight& w, double r) { return w.tail(r); }

namespace detail {

// Geometric grid r_i = 1 - 2^{-i}; the scale-invariant doubling statements
// get exercised once per dyadic scale. Stops where the tail (or the grid
// radius itself) falls below the floating-point floor.
inline std::vector<double> tail_on_grid(const RadialWeight& w, int n,
                                        bool* truncated = nullptr) {
    std::vector<double> vals;
    vals.reserve(n + 1);
    if (truncated) *truncated = false;
    for (int i = 0; i <= n; ++i) {
        const double r = 1.0 - std::ldexp(1.0, -i);
        double h = 0.0;
        if (r < 1.0) h = w.tail(r);
        if (!(h > 0.0) || !std::isfinite(h)) {
            if (truncated) *truncated = true;
            break;
        }
        vals.push_back(h);
    }
    return vals;
}

// Boundedness of a positive ratio sequence cannot be proven from finite
// data; declared heuristic: the last-quartile slope of log(ratio) must stay
// below tol per grid step.
inline bool bounded_trend(const std::vector<double>& ratios, double tol) {
    const int n = static_cast<int>(ratios.size());
    if (n < 4) return false;
    std::vector<double> logs(ratios.size());
    for (std::size_t i = 0; i < ratios.size(); ++i) logs[i] = std::log(ratios[i]);
    const int q = std::max(4, n / 4);
    return fit_slope(logs.data() + (n - q), q) < tol;
}

} // namespace detail

// Upper doubling class: what(r) <= C what((1+r)/2) with uniform C. A grid
// that dies early (tail underflow) still decides non-membership when the
// collected ratios already diverge; it errors out only when the data looked
// bounded, since then nothing can be concluded at this resolution.
inline DoublingReport check_upper_doubling(const RadialWeight& w,
                                           int r_samples = 40) {
    if (r_samples < 16)
        throw config_error("check_upper_doubling requires r_samples >= 16");
    bool truncated = false;
    auto tails = detail::tail_on_grid(w, r_samples + 1, &truncated);
    // (1+r_i)/2 is the next grid point, so ratios come straight off the grid.
    if (tails.size() < 5)
        throw numerical_error(
            "tail below floating-point floor; reduce r_samples");
    std::vector<double> ratios;
    for (std::size_t i = 0; i + 1 < tails.size(); ++i)
        ratios.push_back(tails[i] / tails[i + 1]);
    DoublingReport rep;
    rep.constant = *std::max_element(ratios.begin(), ratios.end());
    rep.member = detail::bounded_trend(ratios, 0.02);
    if (truncated && rep.member)
        throw numerical_error(
            "tail below floating-point floor; reduce r_samples");
    return rep;
}

// Lower doubling class: what(r) >= C what(1-(1-r)/K) with C > 1. The grid
// minimum estimates C; a decaying trend of (ratio - 1) toward zero flags
// weights whose ratios tend to 1 and which therefore fail the condition.
inline DoublingReport check_lower_doubling(const RadialWeight& w,
                                           double K = 2.0,
                                           int r_samples = 40) {
    if (!(K > 1.0))
        throw config_error("check_lower_doubling requires K > 1");
    bool truncated = false;
    std::vector<double> ratios;
    for (int i = 0; i <= r_samples; ++i) {
        const double one_minus_r = std::ldexp(1.0, -i);
        const double r1 = 1.0 - one_minus_r, r2 = 1.0 - one_minus_r / K;
        double h1 = 0.0, h2 = 0.0;
        if (r1 < 1.0 && r2 < 1.0) {
            h1 = w.tail(r1);
            h2 = w.tail(r2);
        }
        if (!(h1 > 0.0) || !(h2 > 0.0) || !std::isfinite(h1) ||
            !std::isfinite(h2)) {
            truncated = true;
            break;
        }
        ratios.push_back(h1 / h2);
    }
    if (ratios.size() < 5)
        throw numerical_error(
            "tail below floating-point floor; reduce r_samples");
    DoublingReport rep;
    rep.constant = *std::min_element(ratios.begin(), ratios.end());
    bool above_one = rep.constant > 1.0 + 1e-6;
    std::vector<double> excess;
    for (double rho : ratios) excess.push_back(std::max(rho - 1.0, 1e-300));
    std::vector<double> logs(excess.size());
    for (std::size_t i = 0; i < excess.size(); ++i) logs[i] = std::log(excess[i]);
    const int n = static_cast<int>(logs.size());
    const int q = std::max(4, n / 4);
    const bool decaying = fit_slope(logs.data() + (n - q), q) < -0.015;
    rep.member = above_one && !decaying;
    if (truncated && rep.member)
        throw numerical_error(
            "tail below floating-point floor; reduce r_samples");
    return rep;
}

namespace detail {

inline double snap_up(double x, double step) {
    return std::ceil(x / step - 1e-9) * step;
}
inline double snap_down(double x, double step) {
    return std::floor(x / step + 1e-9) * step;
}

// Smallest b on the 0.05 grid such that pred(b) holds; pred must be
// monotone (false below, true above). Bisects, then settles on the grid by
// testing the exact grid values so that a feasible threshold sitting on the
// grid is found sharply.
template <class Pred>
double bisect_exponent(Pred&& pred, double lo, double hi, double step) {
    if (!pred(hi)) return infinity;
    double a = lo, b = hi;
    while (b - a > step / 4) {
        const double mid = 0.5 * (a + b);
        if (pred(mid))
            b = mid;
        else
            a = mid;
    }
    double g = snap_up(b, step);
    while (g - step > lo && pred(g - step)) g -= step;
    return g;
}

} // namespace detail

// Estimates (alpha, beta, gamma):
//   beta : smallest b with what(r) <= ((1-r)/(1-t))^b what(t) on all grid
//          pairs r <= t (uniform C = 1), then +0.05;
//   alpha: largest a with what(t) <= ((1-t)/(1-r))^a what(r), then -0.05;
//   gamma: smallest g for which int_0^t ((1-t)/(1-s))^g w(s) ds / what(t)
//          shows no growth trend along the grid, then +0.05.
// All searches bisect on [0.01, 64] at 0.05 resolution. alpha <= beta is
// enforced on return.
inline WeightExponents estimate_exponents(const RadialWeight& w) {
    constexpr int grid_n = 40;
    constexpr double step = 0.05;
    const auto tails = detail::tail_on_grid(w, grid_n);
    const int n = static_cast<int>(tails.size());
    if (n < 10)
        throw numerical_error(
            "tail below floating-point floor at the exponent grid");

    // log what(r_i) against dyadic level; pairwise slopes bound the
    // admissible exponents from both sides.
    std::vector<double> logs(tails.size());
    for (int i = 0; i < n; ++i) logs[i] = std::log(tails[i]);
    const double ln2 = std::log(2.0);
    auto beta_pred = [&](double b) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (logs[i] - logs[j] > b * (j - i) * ln2 + 1e-12) return false;
        return true;
    };
    auto alpha_pred = [&](double a) {
        // monotone downward: true for small a
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (logs[j] - logs[i] > -a * (j - i) * ln2 + 1e-12) return false;
        return true;
    };

    WeightExponents e;
    const double beta_min = detail::bisect_exponent(beta_pred, 0.01, 64.0, step);
    if (!std::isfinite(beta_min))
        throw numerical_error("weight not in D-hat at sampled resolution");
    e.beta = beta_min + step;

    // largest a: same grid settling, mirrored
    double lo = 0.0, hi = 64.0;
    if (alpha_pred(hi)) {
        lo = hi;
    } else {
        while (hi - lo > step / 4) {
            const double mid = 0.5 * (lo + hi);
            if (alpha_pred(mid))
                lo = mid;
            else
                hi = mid;
        }
    }
    double a_grid = detail::snap_down(lo, step);
    while (a_grid + step < 64.0 && alpha_pred(a_grid + step)) a_grid += step;
    e.alpha = std::max(a_grid - step, 0.01);

    // integrand kept in ratio form ((1-t)/(1-s))^g <= 1, so large g cannot
    // overflow
    auto gamma_ratio = [&](double g, int i) {
        const double t = 1.0 - std::ldexp(1.0, -i);
        const double lhs = integrate_dyadic_toward(
                               [&](double s) {
                                   return w.density(s) *
                                          std::pow((1.0 - t) / (1.0 - s), g);
                               },
                               0.0, t, 1e-12, 80)
                               .value;
        return lhs / tails[i];
    };
    auto gamma_pred = [&](double g) {
        std::vector<double> ratios;
        for (int i = 2; i < n; ++i) ratios.push_back(gamma_ratio(g, i));
        return detail::bounded_trend(ratios, 0.03);
    };
    const double gamma_min =
        detail::bisect_exponent(gamma_pred, 0.01, 64.0, step);
    if (!std::isfinite(gamma_min))
        throw numerical_error("weight not in D-hat at sampled resolution");
    e.gamma = gamma_min + step;

    e.alpha = std::min(e.alpha, e.beta);
    return e;
}

inline RadialWeight RadialWeight::analyzed() const {
    RadialWeight w = *this;
    w.exps_ = estimate_exponents(*this);
    return w;
}

inline WeightExponents RadialWeight::exponents() const {
    if (exps_) return *exps_;
    return estimate_exponents(*this);
}

} // namespace mna
