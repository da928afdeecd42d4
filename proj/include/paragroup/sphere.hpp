#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "paragroup/spectral.hpp"
#include "paragroup/transform.hpp"

namespace paragroup {

// T3-invariant functions on SU(2) have Fourier blocks supported on integer l
// and on the column n = 0; such functions are exactly the lifts f^sharp of
// functions on S^2 through the Hopf realization (theta, psi) -> (sin theta
// cos psi, sin theta sin psi, cos theta). The S^2 machinery below works with
// the column vector v_l[m] = \hat f(l)_{m0} directly.

// Fixed constant tying T^l_{0,-mu} to the standard complex spherical harmonic
// Y_l^mu: T^l_{0,-mu} = tau(l,mu) Y_l^mu with tau = (-i)^mu sqrt(4pi/(2l+1)).
// Computed from the entry formula once and frozen; regression-tested.
inline cplx sph_tau(int l, int mu) {
    return detail::i_pow(-mu) * std::sqrt(4.0 * pi / (2.0 * l + 1.0));
}

// Quadrature grid on S^2 in Hopf coordinates: Gauss-Legendre in cos(theta),
// uniform azimuth psi in [0, 2pi). Weights normalized to total mass 1
// (integrals against the standard measure mu_0 carry the 4pi factor).
class SphGrid {
  public:
    SphGrid(int n_theta, int n_az, int tw_max_tables) : n_theta_(n_theta), n_az_(n_az) {
        detail::gauss_legendre(n_theta, z_, wz_);
        theta_.resize(n_theta);
        for (int i = 0; i < n_theta; ++i) theta_[i] = std::acos(z_[i]);
        az_.resize(n_az);
        for (int k = 0; k < n_az; ++k) az_[k] = 2.0 * pi * k / n_az;
        build_tables(tw_max_tables);
    }

    // Exact analysis of products of two functions with degree sum <= deg_sum.
    static SphGrid for_band(int deg_sum, int tw_tables) {
        return SphGrid(deg_sum / 2 + 1, deg_sum + 1, tw_tables);
    }

    int n_theta() const { return n_theta_; }
    int n_az() const { return n_az_; }
    std::size_t size() const { return std::size_t(n_theta_) * n_az_; }
    double theta(int i) const { return theta_[i]; }
    double az(int k) const { return az_[k]; }
    double z(int i) const { return z_[i]; }
    double weight(int i) const { return 0.5 * wz_[i] / n_az_; }
    std::size_t index(int i, int k) const { return std::size_t(i) * n_az_ + k; }
    int exact_product_degree() const { return std::min(2 * n_theta_ - 1, n_az_ - 1); }
    int tw_tables() const { return tw_tables_; }

    // P^l_{0m}(z_i); l integer (twice value tw), m doubled index tm.
    cplx p0(int tw, int tm, int i) const {
        return p0tab_[tw / 2][i][(tm + tw) / 2];
    }
    // Cached azimuthal phase e^{+i m az_k}; |m| <= tw_tables/2.
    cplx az_phase(int m, int k) const { return phase_[(m + tw_tables_ / 2) * n_az_ + k]; }

    std::array<double, 3> unit_normal(int i, int k) const {
        double st = std::sin(theta_[i]);
        return {st * std::cos(az_[k]), st * std::sin(az_[k]), z_[i]};
    }

    bool operator==(const SphGrid& o) const {
        return n_theta_ == o.n_theta_ && n_az_ == o.n_az_;
    }

  private:
    void build_tables(int tw_max) {
        tw_tables_ = tw_max;
        int lmax = tw_max / 2;
        p0tab_.resize(lmax + 1);
        for (int l = 0; l <= lmax; ++l) {
            RepLabel lab = RepLabel::integer(l);
            p0tab_[l].assign(n_theta_, std::vector<cplx>(lab.dim()));
            for (int i = 0; i < n_theta_; ++i)
                for (int a = 0; a < lab.dim(); ++a)
                    p0tab_[l][i][a] = wigner_p(lab, 0, lab.twice_m_at(a), theta_[i]);
        }
        phase_.resize(std::size_t(2 * lmax + 1) * n_az_);
        for (int m = -lmax; m <= lmax; ++m)
            for (int k = 0; k < n_az_; ++k)
                phase_[(m + lmax) * std::size_t(n_az_) + k] = std::polar(1.0, m * az_[k]);
    }

    int n_theta_, n_az_, tw_tables_ = 0;
    std::vector<double> z_, wz_, theta_, az_;
    std::vector<std::vector<std::vector<cplx>>> p0tab_;
    std::vector<cplx> phase_;
};

// Samples over an SphGrid.
struct SphField {
    const SphGrid* grid = nullptr;
    Vec values;

    SphField() = default;
    explicit SphField(const SphGrid& g) : grid(&g), values(Vec::Zero(g.size())) {}

    cplx& at(int i, int k) { return values[grid->index(i, k)]; }
    cplx at(int i, int k) const { return values[grid->index(i, k)]; }
    double max_abs() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }

    // Integral against the normalized measure (mass 1).
    cplx mean() const {
        cplx s = 0;
        for (int i = 0; i < grid->n_theta(); ++i)
            for (int k = 0; k < grid->n_az(); ++k) s += grid->weight(i) * at(i, k);
        return s;
    }
    // Integral against the standard measure mu_0 (mass 4pi).
    cplx integral_mu0() const { return 4.0 * pi * mean(); }

    SphField& operator+=(const SphField& o) { values += o.values; return *this; }
    SphField& operator-=(const SphField& o) { values -= o.values; return *this; }
    SphField& operator*=(cplx c) { values *= c; return *this; }
    friend SphField operator*(const SphField& a, const SphField& b) {
        SphField r(*a.grid);
        r.values = a.values.cwiseProduct(b.values);
        return r;
    }
    friend SphField operator+(SphField a, const SphField& b) { return a += b; }
    friend SphField operator-(SphField a, const SphField& b) { return a -= b; }
};

// Column-0 Fourier data of a T3-invariant function: v_l[m] = \hat f(l)_{m0},
// integer l <= l_max.
class SphCoeff {
  public:
    SphCoeff() = default;
    explicit SphCoeff(int l_max) : l_max_(l_max) {
        blocks_.reserve(l_max + 1);
        for (int l = 0; l <= l_max; ++l) blocks_.emplace_back(Vec::Zero(2 * l + 1));
    }

    int l_max() const { return l_max_; }
    Vec& block(int l) { return blocks_[l]; }
    const Vec& block(int l) const { return blocks_[l]; }
    cplx& at(int l, int m) { return blocks_[l][m + l]; }
    cplx at(int l, int m) const { return blocks_[l][m + l]; }

    double plancherel_sq() const {
        double s = 0;
        for (int l = 0; l <= l_max_; ++l) s += (2 * l + 1) * blocks_[l].squaredNorm();
        return s;
    }
    double l2_norm() const { return std::sqrt(plancherel_sq()); }
    double sobolev_norm(double s) const {
        double acc = 0;
        for (int l = 0; l <= l_max_; ++l) {
            RepLabel lab = RepLabel::integer(l);
            acc += (2 * l + 1) * std::pow(lab.bracket(), 2 * s) * blocks_[l].squaredNorm();
        }
        return std::sqrt(acc);
    }

    template <class H>
    SphCoeff scaled(H&& h) const {
        SphCoeff r(*this);
        for (int l = 0; l <= l_max_; ++l) r.blocks_[l] *= cplx(h(RepLabel::integer(l)));
        return r;
    }

    SphCoeff truncated(int new_max) const {
        SphCoeff r(new_max);
        for (int l = 0; l <= std::min(l_max_, new_max); ++l) r.blocks_[l] = blocks_[l];
        return r;
    }

    SphCoeff& operator+=(const SphCoeff& o) {
        for (int l = 0; l <= std::min(l_max_, o.l_max_); ++l) blocks_[l] += o.blocks_[l];
        return *this;
    }
    SphCoeff& operator-=(const SphCoeff& o) {
        for (int l = 0; l <= std::min(l_max_, o.l_max_); ++l) blocks_[l] -= o.blocks_[l];
        return *this;
    }
    SphCoeff& operator*=(cplx c) {
        for (auto& b : blocks_) b *= c;
        return *this;
    }
    friend SphCoeff operator+(SphCoeff a, const SphCoeff& b) { return a += b; }
    friend SphCoeff operator-(SphCoeff a, const SphCoeff& b) { return a -= b; }
    friend SphCoeff operator*(cplx c, SphCoeff a) { return a *= c; }

  private:
    int l_max_ = 0;
    std::vector<Vec> blocks_;
};

// f(theta,psi) = sum_l (2l+1) sum_m v_l[m] e^{-im psi} P^l_{0m}(z).
inline SphField sph_synthesis(const SphCoeff& v, const SphGrid& g) {
    if (2 * v.l_max() > g.tw_tables())
        throw std::invalid_argument("sph_synthesis: grid tables too small");
    SphField f(g);
    int L = v.l_max();
    parallel_for(g.n_theta(), [&](std::size_t ii) {
        int i = int(ii);
        std::vector<cplx> fm(2 * L + 1, cplx(0, 0));  // per azimuthal frequency m
        for (int l = 0; l <= L; ++l)
            for (int m = -l; m <= l; ++m)
                fm[m + L] += double(2 * l + 1) * v.at(l, m) * g.p0(2 * l, 2 * m, i);
        for (int k = 0; k < g.n_az(); ++k) {
            cplx s = 0;
            for (int m = -L; m <= L; ++m) s += fm[m + L] * std::polar(1.0, -m * g.az(k));
            f.at(i, k) = s;
        }
    });
    return f;
}

// Largest degree the grid can analyze exactly for band-limited data, also
// capped by the cached tables.
inline int analysis_band(const SphGrid& g, int want) {
    return std::min({want, g.exact_product_degree() / 2, g.tw_tables() / 2});
}

// v_l[m] = sum_nodes w f e^{+im psi} conj(P^l_{0m}(z)).
inline SphCoeff sph_analysis(const SphField& f, int l_max) {
    const SphGrid& g = *f.grid;
    if (2 * l_max > g.tw_tables())
        throw std::invalid_argument("sph_analysis: grid tables too small");
    if (g.exact_product_degree() < 2 * l_max)
        throw std::invalid_argument("sph_analysis: grid too coarse for requested l_max");
    int L = l_max;
    std::vector<std::vector<cplx>> am(g.n_theta(), std::vector<cplx>(2 * L + 1, cplx(0, 0)));
    parallel_for(g.n_theta(), [&](std::size_t ii) {
        int i = int(ii);
        for (int k = 0; k < g.n_az(); ++k) {
            cplx v = f.at(i, k);
            if (v == cplx(0, 0)) continue;
            for (int m = -L; m <= L; ++m) am[i][m + L] += v * std::polar(1.0, m * g.az(k));
        }
        for (auto& c : am[i]) c /= double(g.n_az());
    });
    SphCoeff out(L);
    for (int l = 0; l <= L; ++l)
        for (int m = -l; m <= l; ++m) {
            cplx s = 0;
            for (int i = 0; i < g.n_theta(); ++i)
                s += g.weight(i) * g.n_az() * std::conj(g.p0(2 * l, 2 * m, i)) * am[i][m + L];
            out.at(l, m) = s;
        }
    return out;
}

// Standard complex spherical harmonic Y_l^m(theta, azimuth), Condon-Shortley.
inline cplx sph_harmonic_y(int l, int m, double theta, double azimuth) {
    int am = std::abs(m);
    double x = std::cos(theta);
    double somx2 = std::sin(theta);
    double pmm = 1.0;
    for (int i = 1; i <= am; ++i) pmm *= -(2.0 * i - 1.0) * somx2;
    double p0 = pmm, p1 = x * (2.0 * am + 1.0) * pmm;
    double plm;
    if (l == am) plm = p0;
    else if (l == am + 1) plm = p1;
    else {
        plm = 0;
        for (int ll = am + 2; ll <= l; ++ll) {
            plm = (x * (2.0 * ll - 1.0) * p1 - (ll + am - 1.0) * p0) / (ll - am);
            p0 = p1;
            p1 = plm;
        }
    }
    double norm = std::exp(0.5 * (std::log(2.0 * l + 1.0) - std::log(4.0 * pi) +
                                  std::lgamma(l - am + 1.0) - std::lgamma(l + am + 1.0)));
    cplx y = norm * plm * std::polar(1.0, am * azimuth);
    if (m < 0) y = (am % 2 == 0 ? 1.0 : -1.0) * std::conj(y);
    return y;
}

// Spherical-harmonic coefficient table c_{l,mu} (standard Y basis).
class SphFn {
  public:
    SphFn() = default;
    explicit SphFn(int l_max) : c_(l_max) {}
    // From column-0 data: \hat f(l)_{-mu,0} = c_{l,mu} conj(tau(l,mu)) / 4pi.
    explicit SphFn(const SphCoeff& col0) : c_(col0.l_max()) {
        for (int l = 0; l <= c_.l_max(); ++l)
            for (int mu = -l; mu <= l; ++mu)
                c_.at(l, mu) = 4.0 * pi * col0.at(l, -mu) / std::conj(sph_tau(l, mu));
    }

    int l_max() const { return c_.l_max(); }
    cplx& coeff(int l, int mu) { return c_.at(l, mu); }
    cplx coeff(int l, int mu) const { return c_.at(l, mu); }

    // Column-0 Fourier data of the lift.
    SphCoeff column0() const {
        SphCoeff v(c_.l_max());
        for (int l = 0; l <= c_.l_max(); ++l)
            for (int mu = -l; mu <= l; ++mu)
                v.at(l, -mu) = c_.at(l, mu) * std::conj(sph_tau(l, mu)) / (4.0 * pi);
        return v;
    }

    double sobolev_norm(double s) const { return column0().sobolev_norm(s); }
    double l2_norm_mu0() const {
        // L^2(S^2, d mu_0) norm of sum c Y (orthonormal basis).
        double acc = 0;
        for (int l = 0; l <= c_.l_max(); ++l)
            for (int mu = -l; mu <= l; ++mu) acc += std::norm(c_.at(l, mu));
        return std::sqrt(acc);
    }
    double max_violation_from_real() const {
        double v = 0;
        for (int l = 0; l <= c_.l_max(); ++l)
            for (int mu = -l; mu <= l; ++mu) {
                cplx want = (mu % 2 == 0 ? 1.0 : -1.0) * std::conj(c_.at(l, -mu));
                v = std::max(v, std::abs(c_.at(l, mu) - want));
            }
        return v;
    }

    static SphFn basis(int l_max, int l, int mu, cplx amp = cplx(1, 0)) {
        SphFn f(l_max);
        f.coeff(l, mu) = amp;
        return f;
    }

    SphFn truncated_fn(int new_max) const {
        SphFn f(new_max);
        for (int l = 0; l <= std::min(l_max(), new_max); ++l)
            for (int mu = -l; mu <= l; ++mu) f.coeff(l, mu) = coeff(l, mu);
        return f;
    }

    SphFn& operator+=(const SphFn& o) { c_ += o.c_; return *this; }
    SphFn& operator-=(const SphFn& o) { c_ -= o.c_; return *this; }
    SphFn& operator*=(cplx a) { c_ *= a; return *this; }
    friend SphFn operator-(SphFn a, const SphFn& b) { return a -= b; }
    friend SphFn operator+(SphFn a, const SphFn& b) { return a += b; }

  private:
    SphCoeff c_;  // Y-basis coefficients, stored in the same container shape
};

inline SphField sph_synthesis(const SphFn& f, const SphGrid& g) {
    return sph_synthesis(f.column0(), g);
}
inline SphFn sph_to_fn(const SphField& f, int l_max) { return SphFn(sph_analysis(f, l_max)); }

// Lift of a function on S^2 to its T3-invariant SpectralFn on SU(2).
inline SpectralFn lift(const SphFn& g) {
    SpectralFn out(RepLabel::integer(g.l_max()));
    SphCoeff v = g.column0();
    for (int l = 0; l <= g.l_max(); ++l) {
        RepLabel lab = RepLabel::integer(l);
        for (int m = -l; m <= l; ++m)
            out.block(2 * l)(lab.index_of(2 * m), lab.index_of(0)) = v.at(l, m);
    }
    return out;
}

struct ProjectReport {
    SphFn fn;
    double max_violation = 0;  // largest entry outside the T3-invariant sector
};

// Inverse of lift; fails if the input is not T3-invariant within tol.
inline ProjectReport project(const SpectralFn& a, double tol = 1e-9) {
    int L = a.tw_max() / 2;
    SphCoeff v(L);
    double viol = 0;
    for (int tw = 0; tw <= a.tw_max(); ++tw) {
        RepLabel lab(tw);
        const Mat& blk = a.block(tw);
        for (int i = 0; i < lab.dim(); ++i)
            for (int j = 0; j < lab.dim(); ++j) {
                bool in_sector = (tw % 2 == 0) && (lab.twice_m_at(j) == 0);
                if (in_sector)
                    v.at(tw / 2, lab.twice_m_at(i) / 2) = blk(i, j);
                else
                    viol = std::max(viol, std::abs(blk(i, j)));
            }
    }
    if (viol > tol)
        throw std::invalid_argument("project: input not T3-invariant, max violating entry " +
                                    std::to_string(viol));
    return {SphFn(v), viol};
}

// Left-invariant field X_j applied to a lifted function (column-0 data).
inline SphCoeff apply_xj(int j, const SphCoeff& v) {
    SphCoeff out(v.l_max());
    for (int l = 0; l <= v.l_max(); ++l)
        out.block(l) = sigma_x(j, RepLabel::integer(l)) * v.block(l);
    return out;
}

inline SphCoeff laplace(const SphCoeff& v) {
    return v.scaled([](RepLabel l) { return l.laplace_eigenvalue(); });
}

// Pointwise |grad_0 f|^2 = sum_j (X_j f)^2 for real lifted f; returns grid field.
inline SphField grad_dot(const SphCoeff& f, const SphCoeff& g, const SphGrid& grid) {
    SphField acc(grid);
    for (int j = 1; j <= 3; ++j) {
        SphField a = sph_synthesis(apply_xj(j, f), grid);
        SphField b = sph_synthesis(apply_xj(j, g), grid);
        acc.values += a.values.cwiseProduct(b.values);
    }
    return acc;
}

}  // namespace paragroup
