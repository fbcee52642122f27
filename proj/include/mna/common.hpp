#pragma once

#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace mna {

using complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr double infinity = std::numeric_limits<double>::infinity();

inline bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

inline double sq(double x) { return x * x; }

// z^n for integer n >= 0 by binary exponentiation.
inline complex ipow(complex z, long n) {
    complex r{1.0, 0.0};
    while (n > 0) {
        if (n & 1) r *= z;
        z *= z;
        n >>= 1;
    }
    return r;
}

// w^{-m} where m > 0 need not be an integer. Re(w) > 0 for all inputs that
// arise here (w = 1 - conj(a) z with |a|, |z| < 1), so the principal branch
// is smooth. Integer m up to 64 avoids the complex log.
inline complex pow_neg(complex w, double m) {
    long mi = static_cast<long>(m);
    if (m == static_cast<double>(mi) && mi >= 0 && mi <= 64)
        return ipow(complex{1.0, 0.0} / w, mi);
    return std::pow(w, -m);
}

class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace mna
