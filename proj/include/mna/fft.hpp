#pragma once

#include <vector>

#include "mna/common.hpp"

namespace mna {

// In-place radix-2 transform. sign = +1 computes the synthesis sum
// X_k = sum_m a_m exp(+2*pi*i*k*m/N); sign = -1 the analysis sum.
// No 1/N normalization on either direction.
inline void fft_pow2(std::vector<complex>& a, int sign) {
    const std::size_t n = a.size();
    if (n < 2) return;
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * pi / double(len);
        const complex wl{std::cos(ang), std::sin(ang)};
        for (std::size_t i = 0; i < n; i += len) {
            complex w{1.0, 0.0};
            for (std::size_t k = 0; k < len / 2; ++k) {
                const complex u = a[i + k];
                const complex v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

} // namespace mna
