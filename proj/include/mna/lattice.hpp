#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "mna/common.hpp"

namespace mna {

inline double pseudo_distance(complex a, complex z) {
    if (std::abs(a) >= 1.0 || std::abs(z) >= 1.0)
        throw config_error("pseudo_distance requires points inside the disc");
    return std::abs((a - z) / (1.0 - std::conj(a) * z));
}

// min pairwise pseudohyperbolic distance >= delta
inline bool is_separated(std::span<const complex> points, double delta) {
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (pseudo_distance(points[i], points[j]) < delta) return false;
    return true;
}

struct CellIndex {
    int j = 0;
    long l = 0;
    bool operator==(const CellIndex&) const = default;
};

struct CellBox {
    double r_lo, r_hi, theta_lo, theta_hi;
};

enum class NeighborMode { euclidean, pseudo };

// Dyadic polar decomposition of the disc: level j covers the annulus
// r_j <= |z| < r_{j+1} with r_j = 1 - K^{-j}, split into K^{j+3} equal
// sectors. Cells optionally subdivide into M_sub x M_sub subcells of equal
// Euclidean area (equal angular slices, equal-area radial rings).
// Everything beyond level J_max is absent: results are truncated-disc
// quantities. Immutable after build; queries are pure.
class DyadicLattice {
public:
    DyadicLattice(int K, int J_max, int M_sub)
        : K_(K), J_max_(J_max), M_sub_(M_sub) {
        if (K < 2) throw config_error("build_lattice requires K >= 2");
        if (J_max < 0) throw config_error("build_lattice requires J_max >= 0");
        if (M_sub < 1) throw config_error("build_lattice requires M_sub >= 1");
        radii_.resize(J_max + 2);
        sectors_.resize(J_max + 1);
        offsets_.resize(J_max + 2, 0);
        double count = 0.0;
        long s = 1;
        for (int i = 0; i < 3; ++i) s *= K;
        for (int j = 0; j <= J_max; ++j) {
            radii_[j] = 1.0 - std::pow(double(K), -j);
            sectors_[j] = s;
            offsets_[j + 1] = offsets_[j] + s;
            count += double(s) * M_sub * M_sub;
            s *= K;
        }
        radii_[J_max + 1] = 1.0 - std::pow(double(K), -(J_max + 1));
        if (count > 1e7)
            throw config_error("lattice cell budget exceeded: " +
                               std::to_string(static_cast<long long>(count)) +
                               " cells");
    }

    int K() const { return K_; }
    int J_max() const { return J_max_; }
    int M_sub() const { return M_sub_; }
    long total_cells() const { return offsets_[J_max_ + 1]; }
    long total_subcells() const {
        return total_cells() * long(M_sub_) * M_sub_;
    }
    long sectors(int j) const { return sectors_[j]; }
    double radius(int j) const { return radii_[j]; } // r_j, j <= J_max+1
    double truncation_radius() const { return radii_[J_max_ + 1]; }
    long cell_id(int j, long l) const { return offsets_[j] + l; }

    CellBox box(int j, long l) const {
        check(j, l);
        const double w = 2.0 * pi / double(sectors_[j]);
        return {radii_[j], radii_[j + 1], w * double(l), w * double(l + 1)};
    }

    // polar midpoint: stays inside the half-open cell and keeps the
    // center family separated
    complex center(int j, long l) const {
        const CellBox b = box(j, l);
        const double r = 0.5 * (b.r_lo + b.r_hi);
        const double t = 0.5 * (b.theta_lo + b.theta_hi);
        return std::polar(r, t);
    }

    double cell_area(int j, long l) const {
        const CellBox b = box(j, l);
        return 0.5 * (b.theta_hi - b.theta_lo) * (b.r_hi * b.r_hi - b.r_lo * b.r_lo);
    }

    // Subcells k = 1..M_sub^2, k-1 = ring*M_sub + slice. Ring radii solve
    // rho^2 - rho_prev^2 = const so every ring (hence every subcell) has the
    // same Euclidean area.
    CellBox subcell_box(int j, long l, int k) const {
        const CellBox b = box(j, l);
        if (k < 1 || k > M_sub_ * M_sub_)
            throw config_error("subcell index out of range");
        const int ring = (k - 1) / M_sub_, slice = (k - 1) % M_sub_;
        const double q2 = (b.r_hi * b.r_hi - b.r_lo * b.r_lo) / double(M_sub_);
        const double rlo = std::sqrt(b.r_lo * b.r_lo + ring * q2);
        const double rhi = std::sqrt(b.r_lo * b.r_lo + (ring + 1) * q2);
        const double w = (b.theta_hi - b.theta_lo) / double(M_sub_);
        return {rlo, rhi, b.theta_lo + slice * w, b.theta_lo + (slice + 1) * w};
    }

    complex subcell_center(int j, long l, int k) const {
        const CellBox b = subcell_box(j, l, k);
        return std::polar(0.5 * (b.r_lo + b.r_hi), 0.5 * (b.theta_lo + b.theta_hi));
    }

    double subcell_area(int j, long l) const {
        return cell_area(j, l) / double(M_sub_ * M_sub_);
    }

    CellIndex locate(complex z) const {
        const double az = std::abs(z);
        if (az >= truncation_radius())
            throw config_error("beyond lattice truncation");
        int j = 0;
        if (az > 0.0) {
            j = static_cast<int>(std::floor(-std::log1p(-az) / std::log(double(K_))));
            j = std::clamp(j, 0, J_max_);
            while (j > 0 && az < radii_[j]) --j;
            while (j < J_max_ && az >= radii_[j + 1]) ++j;
        }
        double t = std::arg(z);
        if (t < 0.0) t += 2.0 * pi;
        if (t >= 2.0 * pi) t = 0.0;
        const long n = sectors_[j];
        long l = static_cast<long>(std::floor(t / (2.0 * pi) * double(n)));
        l = std::clamp(l, 0L, n - 1);
        // half-open angular boundaries with float wobble
        const double w = 2.0 * pi / double(n);
        if (t < w * double(l)) l = (l + n - 1) % n;
        else if (t >= w * double(l + 1)) l = (l + 1) % n;
        return {j, l};
    }

    // U_{j,l}: euclidean mode uses the set-distance threshold
    // K^{-(j+1)}(1-1/K); pseudo mode uses pseudohyperbolic set distance < r.
    // Set distances are approximated by 8 boundary samples per cell plus the
    // center (documented approximation).
    std::vector<CellIndex> neighbors(int j, long l, NeighborMode mode,
                                     double r = 0.5) const {
        check(j, l);
        const double thresh =
            std::pow(double(K_), -(j + 1)) * (1.0 - 1.0 / double(K_));
        const auto own = sample_points(j, l);
        // Euclidean search window around the cell
        double reach;
        if (mode == NeighborMode::euclidean) {
            reach = thresh * (1.0 + 1e-12);
        } else {
            if (!(r > 0.0 && r < 1.0))
                throw config_error("pseudo neighbor radius must lie in (0,1)");
            reach = 2.0 * r * std::pow(double(K_), -j) / (1.0 - r);
        }
        std::vector<CellIndex> out;
        for (int i = 0; i <= J_max_; ++i) {
            const double gap = std::max(
                {radii_[j] - radii_[i + 1], radii_[i] - radii_[j + 1], 0.0});
            if (gap > reach) continue;
            const long n = sectors_[i];
            const CellBox bj = box(j, l);
            long lo_l, hi_l;
            if (radii_[i] < 0.35 || n <= 4 * K_ * K_ * K_) {
                lo_l = 0;
                hi_l = n - 1;
            } else {
                const double margin = reach / radii_[i] + 2.0 * pi / double(n);
                const double t0 = bj.theta_lo - margin, t1 = bj.theta_hi + margin;
                lo_l = static_cast<long>(std::floor(t0 / (2.0 * pi) * double(n)));
                hi_l = static_cast<long>(std::ceil(t1 / (2.0 * pi) * double(n)));
                if (hi_l - lo_l + 1 >= n) {
                    lo_l = 0;
                    hi_l = n - 1;
                }
            }
            for (long m = lo_l; m <= hi_l; ++m) {
                const long mm = ((m % n) + n) % n;
                const auto other = sample_points(i, mm);
                if (mode == NeighborMode::euclidean) {
                    if (sampled_euclid(own, other) <= thresh * (1.0 + 1e-12))
                        out.push_back({i, mm});
                } else {
                    if (sampled_pseudo(own, other) < r) out.push_back({i, mm});
                }
            }
        }
        return out;
    }

    // Minimum pseudohyperbolic separation of the center family. The minimum
    // is attained between nearby cells, so a local scan suffices; verified
    // against the full pairwise scan in the tests.
    double min_center_separation() const {
        double best = 1.0;
        for (int j = 0; j <= J_max_; ++j) {
            const long n = sectors_[j];
            for (long l = 0; l < n; ++l) {
                const complex c = center(j, l);
                for (int i = j; i <= std::min(J_max_, j + 1); ++i) {
                    const long ni = sectors_[i];
                    const long base = static_cast<long>(
                        std::floor(std::arg(c) < 0
                                       ? (std::arg(c) + 2 * pi) / (2 * pi) * ni
                                       : std::arg(c) / (2 * pi) * ni));
                    for (long d = -2 * K_; d <= 2 * K_; ++d) {
                        const long m = ((base + d) % ni + ni) % ni;
                        if (i == j && m == l) continue;
                        if (i == j && l > m) continue; // each pair once
                        best = std::min(best, pseudo_distance(c, center(i, m)));
                    }
                }
            }
        }
        return best;
    }

    // 4 corners + 4 edge midpoints + center
    std::array<complex, 9> sample_points(int j, long l) const {
        const CellBox b = box(j, l);
        const double rc = 0.5 * (b.r_lo + b.r_hi);
        const double tc = 0.5 * (b.theta_lo + b.theta_hi);
        return {std::polar(b.r_lo, b.theta_lo), std::polar(b.r_lo, b.theta_hi),
                std::polar(b.r_hi, b.theta_lo), std::polar(b.r_hi, b.theta_hi),
                std::polar(b.r_lo, tc),         std::polar(b.r_hi, tc),
                std::polar(rc, b.theta_lo),     std::polar(rc, b.theta_hi),
                std::polar(rc, tc)};
    }

    std::vector<complex> all_centers() const {
        std::vector<complex> cs;
        cs.reserve(total_cells());
        for (int j = 0; j <= J_max_; ++j)
            for (long l = 0; l < sectors_[j]; ++l) cs.push_back(center(j, l));
        return cs;
    }

private:
    void check(int j, long l) const {
        if (j < 0 || j > J_max_ || l < 0 || l >= sectors_[j])
            throw config_error("cell index out of range");
    }

    static double sampled_euclid(const std::array<complex, 9>& a,
                                 const std::array<complex, 9>& b) {
        double best = infinity;
        for (const auto& x : a)
            for (const auto& y : b) best = std::min(best, std::abs(x - y));
        return best;
    }

    static double sampled_pseudo(const std::array<complex, 9>& a,
                                 const std::array<complex, 9>& b) {
        double best = 1.0;
        for (const auto& x : a)
            for (const auto& y : b) best = std::min(best, pseudo_distance(x, y));
        return best;
    }

    int K_, J_max_, M_sub_;
    std::vector<double> radii_;
    std::vector<long> sectors_;
    std::vector<long> offsets_;
};

inline DyadicLattice build_lattice(int K, int J_max, int M_sub = 1) {
    return DyadicLattice(K, J_max, M_sub);
}

// CSV schema: j,l,k,r_lo,r_hi,theta_lo,theta_hi,center_re,center_im
inline void export_lattice_csv(const DyadicLattice& L, std::ostream& os) {
    os << "j,l,k,r_lo,r_hi,theta_lo,theta_hi,center_re,center_im\n";
    os.precision(17);
    for (int j = 0; j <= L.J_max(); ++j)
        for (long l = 0; l < L.sectors(j); ++l)
            for (int k = 1; k <= L.M_sub() * L.M_sub(); ++k) {
                const CellBox b = L.subcell_box(j, l, k);
                const complex c = L.subcell_center(j, l, k);
                os << j << ',' << l << ',' << k << ',' << b.r_lo << ',' << b.r_hi
                   << ',' << b.theta_lo << ',' << b.theta_hi << ',' << c.real()
                   << ',' << c.imag() << '\n';
            }
}

} // namespace mna
