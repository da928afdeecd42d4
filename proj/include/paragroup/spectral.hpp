#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <vector>

#include "paragroup/euler.hpp"
#include "paragroup/half_integer.hpp"
#include "paragroup/wigner.hpp"

namespace paragroup {

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            if (n == 1) { p1 = x; }
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = n * (x * p1 - p0) / (x * x - 1.0);
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

}  // namespace detail

// Quadrature grid in Euler angles: Gauss-Legendre in cos(theta), uniform in
// phi over [0,2pi) and psi over [-2pi,2pi) (the full 4pi period required by
// half-integer labels). Node weights include the sin(theta)/16pi^2 factor of
// the normalized Haar measure, so weights sum to 1.
class EulerGrid {
  public:
    EulerGrid(int n_theta, int n_phi, int n_psi)
        : n_theta_(n_theta), n_phi_(n_phi), n_psi_(n_psi) {
        if (n_theta < 1 || n_phi < 1 || n_psi < 1)
            throw std::invalid_argument("EulerGrid: node counts must be positive");
        detail::gauss_legendre(n_theta, z_, wz_);
        theta_.resize(n_theta);
        for (int i = 0; i < n_theta; ++i) theta_[i] = std::acos(z_[i]);
        phi_.resize(n_phi);
        for (int j = 0; j < n_phi; ++j) phi_[j] = 2.0 * pi * j / n_phi;
        psi_.resize(n_psi);
        for (int k = 0; k < n_psi; ++k) psi_[k] = -2.0 * pi + 4.0 * pi * k / n_psi;
    }

    // Smallest grid whose product quadrature is exact for products of two
    // matrix entries with l1 + l2 <= twice_l_sum/1... (argument in doubled units).
    static EulerGrid for_band(int twice_l_product) {
        int L2 = twice_l_product;  // = 2*(l1+l2) bound
        int nt = L2 / 2 + 1;
        int np = L2 + 1;
        int ns = 2 * L2 + 1;
        return EulerGrid(nt, np, ns);
    }

    int n_theta() const { return n_theta_; }
    int n_phi() const { return n_phi_; }
    int n_psi() const { return n_psi_; }
    std::size_t size() const { return std::size_t(n_theta_) * n_phi_ * n_psi_; }

    double theta(int i) const { return theta_[i]; }
    double phi(int j) const { return phi_[j]; }
    double psi(int k) const { return psi_[k]; }
    double z(int i) const { return z_[i]; }
    // Theta-weight including the 1/2 normalization of the z-integral.
    double wz(int i) const { return 0.5 * wz_[i]; }
    double weight(int i) const { return wz(i) / (double(n_phi_) * double(n_psi_)); }

    std::size_t index(int i, int j, int k) const {
        return (std::size_t(i) * n_phi_ + j) * n_psi_ + k;
    }
    EulerPoint point(int i, int j, int k) const { return {phi_[j], theta_[i], psi_[k]}; }

    // Largest D (in doubled units, D = 2*(l1+l2)) such that integrals of
    // products of two matrix entries with 2l1+2l2 <= D are exact.
    int exact_product_degree() const {
        return std::min({2 * n_theta_ - 1, n_phi_ - 1, (n_psi_ - 1) / 2});
    }

    bool operator==(const EulerGrid& o) const {
        return n_theta_ == o.n_theta_ && n_phi_ == o.n_phi_ && n_psi_ == o.n_psi_;
    }

  private:
    int n_theta_, n_phi_, n_psi_;
    std::vector<double> z_, wz_, theta_, phi_, psi_;
};

// Complex samples over an EulerGrid.
struct GridFn {
    const EulerGrid* grid = nullptr;
    Vec values;

    GridFn() = default;
    explicit GridFn(const EulerGrid& g) : grid(&g), values(Vec::Zero(g.size())) {}

    cplx& at(int i, int j, int k) { return values[grid->index(i, j, k)]; }
    cplx at(int i, int j, int k) const { return values[grid->index(i, j, k)]; }

    double max_abs() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
    double l2_norm() const {
        double s = 0;
        for (int i = 0; i < grid->n_theta(); ++i)
            for (int j = 0; j < grid->n_phi(); ++j)
                for (int k = 0; k < grid->n_psi(); ++k)
                    s += grid->weight(i) * std::norm(at(i, j, k));
        return std::sqrt(s);
    }
    cplx mean() const {
        cplx s = 0;
        for (int i = 0; i < grid->n_theta(); ++i)
            for (int j = 0; j < grid->n_phi(); ++j)
                for (int k = 0; k < grid->n_psi(); ++k) s += grid->weight(i) * at(i, j, k);
        return s;
    }

    GridFn& operator+=(const GridFn& o) { values += o.values; return *this; }
    GridFn& operator-=(const GridFn& o) { values -= o.values; return *this; }
    GridFn& operator*=(cplx c) { values *= c; return *this; }
    friend GridFn operator*(const GridFn& a, const GridFn& b) {
        GridFn r(*a.grid);
        r.values = a.values.cwiseProduct(b.values);
        return r;
    }
};

template <class F>
GridFn sample(const EulerGrid& g, F&& f) {
    GridFn out(g);
    for (int i = 0; i < g.n_theta(); ++i)
        for (int j = 0; j < g.n_phi(); ++j)
            for (int k = 0; k < g.n_psi(); ++k) out.at(i, j, k) = f(g.point(i, j, k));
    return out;
}

// Peter-Weyl coefficients: one (2l+1)x(2l+1) block per half-integer l <= l_max.
// Block entry (i, j) holds \hat f(l)_{mn} with m = row index i, n = column
// index j (so that f = sum_l (2l+1) Tr(\hat f(l) T^l(x)) with the plain
// matrix trace).
class SpectralFn {
  public:
    SpectralFn() = default;
    explicit SpectralFn(RepLabel l_max) : l_max_(l_max) {
        blocks_.reserve(l_max.twice_l + 1);
        for (int tw = 0; tw <= l_max.twice_l; ++tw)
            blocks_.emplace_back(Mat::Zero(tw + 1, tw + 1));
    }

    RepLabel l_max() const { return l_max_; }
    int tw_max() const { return l_max_.twice_l; }
    Mat& block(int tw) { return blocks_[tw]; }
    const Mat& block(int tw) const { return blocks_[tw]; }

    cplx& at(int tw, int twice_m, int twice_n) {
        RepLabel l(tw);
        return blocks_[tw](l.index_of(twice_m), l.index_of(twice_n));
    }

    double plancherel_sq() const {
        double s = 0;
        for (int tw = 0; tw <= tw_max(); ++tw) s += (tw + 1) * blocks_[tw].squaredNorm();
        return s;
    }
    double l2_norm() const { return std::sqrt(plancherel_sq()); }

    double sobolev_norm(double s) const {
        double acc = 0;
        for (int tw = 0; tw <= tw_max(); ++tw) {
            RepLabel l(tw);
            acc += (tw + 1) * std::pow(l.bracket(), 2.0 * s) * blocks_[tw].squaredNorm();
        }
        return std::sqrt(acc);
    }

    // Scale block l by a scalar multiplier h(l).
    template <class H>
    SpectralFn scaled(H&& h) const {
        SpectralFn r(*this);
        for (int tw = 0; tw <= tw_max(); ++tw) r.blocks_[tw] *= cplx(h(RepLabel(tw)));
        return r;
    }

    SpectralFn truncated(RepLabel new_max) const {
        SpectralFn r(new_max);
        for (int tw = 0; tw <= std::min(tw_max(), new_max.twice_l); ++tw)
            r.blocks_[tw] = blocks_[tw];
        return r;
    }

    SpectralFn& operator+=(const SpectralFn& o) {
        for (int tw = 0; tw <= std::min(tw_max(), o.tw_max()); ++tw) blocks_[tw] += o.blocks_[tw];
        return *this;
    }
    SpectralFn& operator-=(const SpectralFn& o) {
        for (int tw = 0; tw <= std::min(tw_max(), o.tw_max()); ++tw) blocks_[tw] -= o.blocks_[tw];
        return *this;
    }
    SpectralFn& operator*=(cplx c) {
        for (auto& b : blocks_) b *= c;
        return *this;
    }
    friend SpectralFn operator-(SpectralFn a, const SpectralFn& b) { return a -= b; }
    friend SpectralFn operator+(SpectralFn a, const SpectralFn& b) { return a += b; }

    // Random coefficients on blocks with tw in [tw_lo, tw_hi], entries O(1).
    static SpectralFn random(RepLabel l_max, int tw_lo, int tw_hi, std::uint64_t seed) {
        SpectralFn f(l_max);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        for (int tw = tw_lo; tw <= std::min(tw_hi, l_max.twice_l); ++tw)
            for (int i = 0; i <= tw; ++i)
                for (int j = 0; j <= tw; ++j) f.block(tw)(i, j) = cplx(g(rng), g(rng));
        return f;
    }

  private:
    RepLabel l_max_;
    std::vector<Mat> blocks_;
};

}  // namespace paragroup
