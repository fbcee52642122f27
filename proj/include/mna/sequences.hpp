#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mna/common.hpp"
#include "mna/lattice.hpp"

namespace mna {

// Complex coefficients lambda_{j,l} (or lambda_{j,l,k} with subcells)
// aligned to a dyadic lattice shape: row j holds K^{j+3} * M_sub^2 entries,
// inner index l*M_sub^2 + (k-1). Absent entries are zero.
class CoefficientArray {
public:
    CoefficientArray() = default;

    explicit CoefficientArray(const DyadicLattice& L, bool with_subcells = false)
        : K_(L.K()), M_sub_(with_subcells ? L.M_sub() : 1) {
        rows_.resize(L.J_max() + 1);
        for (int j = 0; j <= L.J_max(); ++j)
            rows_[j].assign(L.sectors(j) * std::size_t(M_sub_) * M_sub_,
                            complex{0.0, 0.0});
    }

    // free-shape array (tests, duality probes)
    static CoefficientArray from_rows(std::vector<std::vector<complex>> rows) {
        CoefficientArray a;
        a.rows_ = std::move(rows);
        return a;
    }

    int levels() const { return static_cast<int>(rows_.size()); }
    int subcells_per_cell() const { return M_sub_ * M_sub_; }
    const std::vector<std::vector<complex>>& rows() const { return rows_; }
    std::vector<std::vector<complex>>& rows() { return rows_; }

    complex& at(int j, long l, int k = 1) {
        return rows_[j][std::size_t(l) * M_sub_ * M_sub_ + (k - 1)];
    }
    complex at(int j, long l, int k = 1) const {
        return rows_[j][std::size_t(l) * M_sub_ * M_sub_ + (k - 1)];
    }

    std::size_t entry_count() const {
        std::size_t n = 0;
        for (const auto& r : rows_) n += r.size();
        return n;
    }

private:
    int K_ = 2;
    int M_sub_ = 1;
    std::vector<std::vector<complex>> rows_;
};

namespace detail {

inline double lp_of_row(const std::vector<complex>& row, double p) {
    if (p == infinity) {
        double m = 0.0;
        for (const auto& v : row) m = std::max(m, std::abs(v));
        return m;
    }
    double s = 0.0;
    for (const auto& v : row) s += std::pow(std::abs(v), p);
    return std::pow(s, 1.0 / p);
}

} // namespace detail

// || {||row_j||_{l^p}}_j ||_{l^q}; sup norms for infinite exponents.
// Quasi-norms for exponents below 1 use the same formulas.
inline double lpq_norm(const CoefficientArray& a, double p, double q) {
    if (!(p > 0.0) || !(q > 0.0))
        throw config_error("lpq_norm requires positive exponents");
    if (q == infinity) {
        double m = 0.0;
        for (const auto& row : a.rows())
            m = std::max(m, detail::lp_of_row(row, p));
        return m;
    }
    double s = 0.0;
    for (const auto& row : a.rows())
        s += std::pow(detail::lp_of_row(row, p), q);
    return std::pow(s, 1.0 / q);
}

// p' = infinity for 0 < p <= 1, p/(p-1) for 1 < p < infinity, 1 for p = inf
inline double conjugate_exponent(double p) {
    if (!(p > 0.0)) throw config_error("conjugate_exponent requires p > 0");
    if (p <= 1.0) return infinity;
    if (p == infinity) return 1.0;
    return p / (p - 1.0);
}

struct DualityGap {
    double lower = 0.0; // best pairing found over unit-norm c
    double norm = 0.0;  // ||b||_{l^{p',q'}}
};

namespace detail {

inline complex unit_phase(complex v) {
    const double m = std::abs(v);
    return m == 0.0 ? complex{1.0, 0.0} : std::conj(v) / m;
}

// Extremal c with ||c||_{l^{p,q}} = 1 for the pairing sum c.b: rows aligned
// by Hoelder (|c| ~ |b|^{p'-1}), single best coordinate for p <= 1, flat
// phases for p = inf; outer weights likewise via q.
inline CoefficientArray holder_extremizer(const CoefficientArray& b, double p,
                                          double q) {
    const double pp = conjugate_exponent(p);
    const double qp = conjugate_exponent(q);
    const int J = b.levels();
    std::vector<double> B(J, 0.0);
    auto rows = b.rows();
    std::vector<std::vector<complex>> c(J);
    for (int j = 0; j < J; ++j) {
        const auto& row = rows[j];
        c[j].assign(row.size(), complex{0.0, 0.0});
        B[j] = lp_of_row(row, pp);
        if (B[j] == 0.0) continue;
        if (p <= 1.0) {
            std::size_t best = 0;
            for (std::size_t l = 1; l < row.size(); ++l)
                if (std::abs(row[l]) > std::abs(row[best])) best = l;
            c[j][best] = unit_phase(row[best]);
        } else if (p == infinity) {
            for (std::size_t l = 0; l < row.size(); ++l)
                c[j][l] = unit_phase(row[l]);
        } else {
            for (std::size_t l = 0; l < row.size(); ++l)
                c[j][l] = unit_phase(row[l]) * std::pow(std::abs(row[l]), pp - 1.0);
            const double unit = lp_of_row(c[j], p);
            for (auto& v : c[j]) v /= unit;
        }
    }
    // outer scaling: pairing per unit row is B_j, maximize sum v_j B_j with
    // ||v||_q = 1
    std::vector<double> v(J, 0.0);
    if (q <= 1.0) {
        int best = 0;
        for (int j = 1; j < J; ++j)
            if (B[j] > B[best]) best = j;
        v[best] = 1.0;
    } else if (q == infinity) {
        for (int j = 0; j < J; ++j) v[j] = 1.0;
    } else {
        double den = 0.0;
        for (int j = 0; j < J; ++j) den += std::pow(B[j], qp);
        den = std::pow(den, 1.0 / qp);
        if (den > 0.0)
            for (int j = 0; j < J; ++j)
                v[j] = std::pow(B[j], qp - 1.0) / std::pow(den, qp - 1.0);
    }
    for (int j = 0; j < J; ++j)
        for (auto& x : c[j]) x *= v[j];
    return CoefficientArray::from_rows(std::move(c));
}

inline complex pairing(const CoefficientArray& c, const CoefficientArray& b) {
    complex s{0.0, 0.0};
    for (int j = 0; j < b.levels(); ++j) {
        const auto& rb = b.rows()[j];
        const auto& rc = c.rows()[j];
        for (std::size_t l = 0; l < rb.size(); ++l) s += rc[l] * rb[l];
    }
    return s;
}

} // namespace detail

// norm = ||b||_{l^{p',q'}}; lower = |sum c b| over the closed-form Hoelder
// extremizer plus random unit-norm probes. lower <= norm always; equality
// for the extremizer whenever the exponents are finite.
inline DualityGap duality_gap(const CoefficientArray& b, double p, double q,
                              int probes = 200, std::uint64_t seed = 1) {
    DualityGap out;
    out.norm = lpq_norm(b, conjugate_exponent(p), conjugate_exponent(q));
    auto cstar = detail::holder_extremizer(b, p, q);
    const double unit = lpq_norm(cstar, p, q);
    if (unit > 0.0)
        out.lower = std::abs(detail::pairing(cstar, b)) / unit;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int t = 0; t < probes; ++t) {
        auto c = b; // same shape
        for (auto& row : c.rows())
            for (auto& v : row) v = complex{gauss(rng), gauss(rng)};
        const double cn = lpq_norm(c, p, q);
        if (cn == 0.0) continue;
        out.lower =
            std::max(out.lower, std::abs(detail::pairing(c, b)) / cn);
    }
    out.lower = std::min(out.lower, out.norm); // guard float wobble
    return out;
}

} // namespace mna
