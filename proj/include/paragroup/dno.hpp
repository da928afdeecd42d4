#pragma once

#include <optional>

#include "paragroup/paradiff.hpp"

namespace paragroup {

// ---------------------------------------------------------------------------
// T3-invariant symbols on the sphere grid: one matrix per (l, node), l over
// all half-integers up to tw_max. Entries are T3-invariant scalar functions,
// so x-derivatives and x-filters act entrywise through the S^2 transforms.
// ---------------------------------------------------------------------------
struct SphSymbol {
    const SphGrid* grid = nullptr;
    int tw_max = 0;
    std::vector<std::vector<Mat>> blk;  // [tw][node]

    SphSymbol() = default;
    SphSymbol(const SphGrid& g, int twm) : grid(&g), tw_max(twm) {
        blk.resize(twm + 1);
        for (int tw = 0; tw <= twm; ++tw)
            blk[tw].assign(g.size(), Mat::Zero(tw + 1, tw + 1));
    }

    SphSymbol& operator+=(const SphSymbol& o) {
        for (int tw = 0; tw <= std::min(tw_max, o.tw_max); ++tw)
            for (std::size_t n = 0; n < blk[tw].size(); ++n) blk[tw][n] += o.blk[tw][n];
        return *this;
    }
    SphSymbol& operator-=(const SphSymbol& o) {
        for (int tw = 0; tw <= std::min(tw_max, o.tw_max); ++tw)
            for (std::size_t n = 0; n < blk[tw].size(); ++n) blk[tw][n] -= o.blk[tw][n];
        return *this;
    }
    friend SphSymbol operator*(const SphSymbol& a, const SphSymbol& b) {
        SphSymbol r(*a.grid, std::min(a.tw_max, b.tw_max));
        for (int tw = 0; tw <= r.tw_max; ++tw)
            for (std::size_t n = 0; n < r.blk[tw].size(); ++n)
                r.blk[tw][n] = a.blk[tw][n] * b.blk[tw][n];
        return r;
    }
    // Multiply by a scalar grid field.
    SphSymbol scaled_field(const SphField& c) const {
        SphSymbol r = *this;
        for (int tw = 0; tw <= tw_max; ++tw)
            for (std::size_t n = 0; n < blk[tw].size(); ++n) r.blk[tw][n] *= c.values[n];
        return r;
    }
    template <class H>
    SphSymbol scaled(H&& h) const {
        SphSymbol r = *this;
        for (int tw = 0; tw <= tw_max; ++tw) {
            cplx w = cplx(h(RepLabel(tw)));
            for (auto& m : r.blk[tw]) m *= w;
        }
        return r;
    }

    static SphSymbol identity(const SphGrid& g, int twm) {
        SphSymbol r(g, twm);
        for (int tw = 0; tw <= twm; ++tw)
            for (auto& m : r.blk[tw]) m = Mat::Identity(tw + 1, tw + 1);
        return r;
    }
    template <class H>
    static SphSymbol multiplier(const SphGrid& g, int twm, H&& h) {
        SphSymbol r = identity(g, twm);
        return r.scaled(h);
    }
};

// Quantization of a T3-invariant symbol on column-0 data:
// Op(a) f (x) = sum_{l integer} (2l+1) sum_{k} [a(x,l) v_l]_k T^l_{0k}(x).
inline SphField quantize_t3(const SphSymbol& a, const SphCoeff& v) {
    const SphGrid& g = *a.grid;
    SphField out(g);
    int L = std::min(a.tw_max / 2, v.l_max());
    parallel_for(g.size(), [&](std::size_t node) {
        int i = int(node / g.n_az()), k = int(node % g.n_az());
        cplx s = 0;
        for (int l = 0; l <= L; ++l) {
            if (v.block(l).isZero(0)) continue;
            Vec w = a.blk[2 * l][node] * v.block(l);
            cplx part = 0;
            for (int m = -l; m <= l; ++m)
                part += w[m + l] * g.p0(2 * l, 2 * m, i) * std::polar(1.0, -m * g.az(k));
            s += double(2 * l + 1) * part;
        }
        out.values[node] = s;
    });
    return out;
}

namespace detail {

// Fused analysis -> per-l coefficient operation -> synthesis for one scalar
// entry function, with all phase/Legendre tables cached on the grid and
// caller-provided scratch. coeff_op(l, v) mutates the (2l+1)-vector v.
template <class CoeffOp>
void entry_transform(const SphGrid& g, int Lb, const SphSymbol& a, int tw, int ei, int ej,
                     SphSymbol& out, CoeffOp&& coeff_op, std::vector<cplx>& A,
                     std::vector<Vec>& v, std::vector<cplx>& fm) {
    const int nt = g.n_theta(), naz = g.n_az(), M = 2 * Lb + 1;
    A.assign(std::size_t(nt) * M, cplx(0, 0));
    for (int i = 0; i < nt; ++i) {
        const std::size_t base = g.index(i, 0);
        for (int k = 0; k < naz; ++k) {
            cplx f = a.blk[tw][base + k](ei, ej);
            if (f == cplx(0, 0)) continue;
            for (int m = -Lb; m <= Lb; ++m) A[i * M + (m + Lb)] += f * g.az_phase(m, k);
        }
    }
    double inv_naz = 1.0 / naz;
    for (auto& c : A) c *= inv_naz;
    for (int l = 0; l <= Lb; ++l) {
        v[l].setZero(2 * l + 1);
        for (int i = 0; i < nt; ++i) {
            double w = g.weight(i) * naz;
            for (int m = -l; m <= l; ++m)
                v[l][m + l] += w * std::conj(g.p0(2 * l, 2 * m, i)) * A[i * M + (m + Lb)];
        }
        coeff_op(l, v[l]);
    }
    fm.assign(std::size_t(nt) * M, cplx(0, 0));
    for (int l = 0; l <= Lb; ++l)
        for (int i = 0; i < nt; ++i)
            for (int m = -l; m <= l; ++m)
                fm[i * M + (m + Lb)] += double(2 * l + 1) * v[l][m + l] * g.p0(2 * l, 2 * m, i);
    for (int i = 0; i < nt; ++i) {
        const std::size_t base = g.index(i, 0);
        for (int k = 0; k < naz; ++k) {
            cplx s = 0;
            for (int m = -Lb; m <= Lb; ++m)
                s += fm[i * M + (m + Lb)] * std::conj(g.az_phase(m, k));
            out.blk[tw][base + k](ei, ej) = s;
        }
    }
}

template <class CoeffOp>
SphSymbol entrywise_x(const SphSymbol& a, int l_band, bool integer_blocks_only,
                      CoeffOp&& coeff_op) {
    const SphGrid& g = *a.grid;
    SphSymbol r(g, a.tw_max);
    for (int tw = 0; tw <= a.tw_max; ++tw) {
        if (integer_blocks_only && tw % 2 == 1) continue;
        int d = tw + 1;
        parallel_for(std::size_t(d) * d, [&](std::size_t e) {
            thread_local std::vector<cplx> A, fm;
            thread_local std::vector<Vec> v;
            if (int(v.size()) < l_band + 1) v.resize(l_band + 1);
            entry_transform(g, l_band, a, tw, int(e / d), int(e % d), r,
                            [&](int l, Vec& vl) { coeff_op(tw, l, vl); }, A, v, fm);
        });
    }
    return r;
}

}  // namespace detail

// dpar^{(mu)} = +Pi_mu applied to the x-dependence, entrywise.
inline SphSymbol x_derivative(const SphSymbol& a, PiTag mu, int l_band) {
    std::vector<Mat> sig(l_band + 1);
    for (int l = 0; l <= l_band; ++l) sig[l] = sigma(mu, RepLabel::integer(l));
    return detail::entrywise_x(a, l_band, false,
                               [&](int, int l, Vec& vl) { vl = (sig[l] * vl).eval(); });
}

// chi-regularization of the x-dependence, per l, entrywise. Only integer
// blocks are produced (half-integer blocks never act on lifted data).
inline SphSymbol regularize_t3(const SphSymbol& a, const AdmissibleCutoff& chi, int l_band) {
    return detail::entrywise_x(a, l_band, true, [&](int tw, int l, Vec& vl) {
        vl *= cplx(chi(RepLabel::integer(l).freq(), RepLabel(tw).bracket()));
    });
}

// RT differences blockwise at every node.
inline SphSymbol rt_difference(PiTag mu, const SphSymbol& a) {
    const SphGrid& g = *a.grid;
    SphSymbol r(g, a.tw_max);
    parallel_for(g.size(), [&](std::size_t node) {
        BlockAccess acc = [&](int tw) -> const Mat* {
            return (tw >= 0 && tw <= a.tw_max) ? &a.blk[tw][node] : nullptr;
        };
        for (int tw = 0; tw <= a.tw_max; ++tw) r.blk[tw][node] = rt_diff_block(mu, tw, acc);
    });
    return r;
}

// ---------------------------------------------------------------------------
// Surface state for the distorted sphere rho = 1 + zeta.
// ---------------------------------------------------------------------------
struct SurfaceState {
    const SphGrid* grid = nullptr;
    int l_max = 0;
    SphFn zeta;
    SphCoeff zc;
    SphField zeta_g, rho, grad_sq, beta1, beta3;
    std::array<SphField, 3> xj_zeta;
    double zeta_linf = 0, zeta_c1 = 0;

    SurfaceState() = default;
    SurfaceState(const SphFn& z, const SphGrid& g) : grid(&g), l_max(z.l_max()), zeta(z) {
        zc = z.column0();
        zeta_g = sph_synthesis(zc, g);
        double im = zeta_g.values.imag().cwiseAbs().maxCoeff();
        if (im > 1e-9) throw std::invalid_argument("SurfaceState: zeta must be real");
        zeta_g.values = zeta_g.values.real().cast<cplx>();
        zeta_linf = zeta_g.max_abs();
        if (zeta_linf >= 0.5)
            throw std::invalid_argument("SurfaceState: |zeta|_inf >= 1/2, shell chart invalid");
        rho = SphField(g);
        rho.values = zeta_g.values.array() + 1.0;
        grad_sq = SphField(g);
        double grad_max = 0;
        for (int j = 1; j <= 3; ++j) {
            xj_zeta[j - 1] = sph_synthesis(apply_xj(j, zc), g);
            xj_zeta[j - 1].values = xj_zeta[j - 1].values.real().cast<cplx>();
            grad_max = std::max(grad_max, xj_zeta[j - 1].max_abs());
            grad_sq.values += xj_zeta[j - 1].values.cwiseAbs2().cast<cplx>();
        }
        zeta_c1 = zeta_linf + grad_max;
        beta1 = SphField(g);
        beta1.values = rho.values.cwiseProduct(rho.values) + grad_sq.values;
        SphField lap = sph_synthesis(laplace(zc), g);
        beta3 = SphField(g);
        beta3.values = 2.0 * rho.values - lap.values;
        for (Eigen::Index i = 0; i < beta1.values.size(); ++i)
            if (beta1.values[i].real() <= 0)
                throw std::invalid_argument("SurfaceState: beta1 not positive");
    }

    double beta1_at(double y, std::size_t node) const {
        double r = rho.values[node].real() + y;
        return r * r + grad_sq.values[node].real();
    }

    // beta2(x, l) = sum_j X_j zeta(x) sigma[X_j](l); skew-Hermitian blocks.
    SphSymbol beta2_symbol(int tw_max) const {
        SphSymbol b(*grid, tw_max);
        for (int tw = 0; tw <= tw_max; ++tw) {
            std::array<Mat, 3> sx{sigma_x(1, RepLabel(tw)), sigma_x(2, RepLabel(tw)),
                                  sigma_x(3, RepLabel(tw))};
            for (std::size_t n = 0; n < grid->size(); ++n) {
                Mat m = Mat::Zero(tw + 1, tw + 1);
                for (int j = 0; j < 3; ++j) m += xj_zeta[j].values[n] * sx[j];
                b.blk[tw][n] = m;
            }
        }
        return b;
    }
};

// ---------------------------------------------------------------------------
// Trefftz oracle for the Dirichlet-Neumann operator: expand the harmonic
// extension in solid harmonics rho^n Y_n^m, collocate on the surface in the
// least-squares sense, then evaluate (Dzetaphi) pointwise.
// ---------------------------------------------------------------------------
struct OracleReport {
    SphFn value;           // D[zeta] phi
    double residual = 0;   // weighted boundary-fit residual
    double cond = 0;       // condition estimate when the dense path is used
    bool used_svd = false;
};

// Values of the solid-harmonic basis Y_n^m on a grid; depends on the grid
// only, so simulations reuse one table across steps.
struct SolidHarmonicTable {
    const SphGrid* grid = nullptr;
    int n_max = 0;
    std::vector<cplx> ytab;  // node-major, columns (n, m) flattened

    SolidHarmonicTable() = default;
    SolidHarmonicTable(const SphGrid& g, int nmax) : grid(&g), n_max(nmax) {
        if (2 * nmax > g.tw_tables())
            throw std::invalid_argument("SolidHarmonicTable: grid tables too small");
        int n_cols = (nmax + 1) * (nmax + 1);
        ytab.resize(g.size() * n_cols);
        // Y_n^m(theta, az) = e^{i m az} P^n_{0,-m}(cos theta) / tau(n, m).
        parallel_for(g.size(), [&](std::size_t node) {
            int i = int(node / g.n_az()), k = int(node % g.n_az());
            std::size_t col = 0;
            for (int n = 0; n <= nmax; ++n)
                for (int m = -n; m <= n; ++m, ++col)
                    ytab[node * n_cols + col] =
                        g.az_phase(m, k) * g.p0(2 * n, -2 * m, i) / sph_tau(n, m);
        });
    }
};

class DnOracle {
  public:
    DnOracle(const SurfaceState& state, int n_max, const SolidHarmonicTable* shared = nullptr)
        : st_(&state), n_max_(n_max) {
        const SphGrid& g = *state.grid;
        n_cols_ = (n_max + 1) * (n_max + 1);
        if (shared && shared->grid == &g && shared->n_max == n_max) {
            ytab_ = &shared->ytab;
        } else {
            own_table_ = SolidHarmonicTable(g, n_max);
            ytab_ = &own_table_.ytab;
        }
        rho_pow_.resize(g.size() * (n_max + 1));
        for (std::size_t node = 0; node < g.size(); ++node) {
            double r = state.rho.values[node].real();
            double p = 1.0;
            for (int n = 0; n <= n_max_; ++n, p *= r) rho_pow_[node * (n_max + 1) + n] = p;
        }
    }

    int n_max() const { return n_max_; }

    // Surface trace of sum c_{nm} rho^n Y_n^m.
    SphField surface_values(const Vec& c) const {
        const SphGrid& g = *st_->grid;
        SphField out(g);
        parallel_for(g.size(), [&](std::size_t node) {
            cplx s = 0;
            std::size_t col = 0;
            for (int n = 0; n <= n_max_; ++n) {
                double rp = rho_pow_[node * (n_max_ + 1) + n];
                for (int m = -n; m <= n; ++m, ++col)
                    s += c[col] * rp * (*ytab_)[node * n_cols_ + col];
            }
            out.values[node] = s;
        });
        return out;
    }
    // Radial derivative d/dy of the extension at the surface.
    SphField normal_derivative(const Vec& c) const {
        const SphGrid& g = *st_->grid;
        SphField out(g);
        parallel_for(g.size(), [&](std::size_t node) {
            cplx s = 0;
            std::size_t col = 0;
            double r = st_->rho.values[node].real();
            for (int n = 0; n <= n_max_; ++n) {
                double dn = (n == 0) ? 0.0 : n * rho_pow_[node * (n_max_ + 1) + n] / r;
                for (int m = -n; m <= n; ++m, ++col)
                    s += c[col] * dn * (*ytab_)[node * n_cols_ + col];
            }
            out.values[node] = s;
        });
        return out;
    }

    // Least-squares collocation of the Dirichlet data. An optional seed warm
    // starts the fixed point (e.g. the previous time-step's coefficients).
    Vec solve(const SphFn& phi, double* residual, double* cond, bool* used_svd,
              double svd_threshold = 1e-12, const Vec* seed = nullptr) const {
        const SphGrid& g = *st_->grid;
        SphField target = sph_synthesis(phi.column0(), g);
        Vec c = Vec::Zero(n_cols_);
        // Fixed-point in coefficient space: c += Y-analysis of the defect.
        // Contraction factor ~ |zeta| * n_max; fall back to dense LS otherwise.
        bool converged = false;
        if (st_->zeta_linf * n_max_ < 0.6) {
            Vec cur = (seed && seed->size() == n_cols_) ? *seed : coeffs_from(phi);
            double tnorm = std::sqrt(std::norm(weighted_norm(target)));
            for (int it = 0; it < 60; ++it) {
                SphField defect = target;
                defect -= surface_values(cur);
                double r = weighted_norm(defect);
                if (r < 1e-13 * std::max(1.0, tnorm)) {
                    converged = true;
                    break;
                }
                SphFn d = sph_to_fn(defect, n_max_);
                cur += coeffs_from(d);
            }
            if (converged) {
                c = cur;
                if (used_svd) *used_svd = false;
                if (cond) *cond = 0;
            }
        }
        if (!converged) {
            // Dense weighted least squares with a truncated SVD.
            Eigen::MatrixXcd E(g.size(), n_cols_);
            Vec b(g.size());
            for (std::size_t node = 0; node < g.size(); ++node) {
                int i = int(node / g.n_az());
                double w = std::sqrt(g.weight(i));
                std::size_t col = 0;
                for (int n = 0; n <= n_max_; ++n) {
                    double rp = rho_pow_[node * (n_max_ + 1) + n];
                    for (int m = -n; m <= n; ++m, ++col)
                        E(node, col) = w * rp * (*ytab_)[node * n_cols_ + col];
                }
                b[node] = w * target.values[node];
            }
            Eigen::BDCSVD<Eigen::MatrixXcd> svd(E, Eigen::ComputeThinU | Eigen::ComputeThinV);
            double smax = svd.singularValues()(0);
            double smin = svd.singularValues()(svd.singularValues().size() - 1);
            double condition = smax / std::max(smin, 1e-300);
            if (cond) *cond = condition;
            if (condition > 1e12) {
                svd.setThreshold(svd_threshold);
                if (condition > 1e14)
                    throw std::runtime_error("oracle_dn: collocation matrix too ill-conditioned");
            }
            c = svd.solve(b);
            if (used_svd) *used_svd = true;
        }
        if (residual) {
            SphField defect = target;
            defect -= surface_values(c);
            *residual = weighted_norm(defect);
        }
        return c;
    }

    Vec coeffs_from(const SphFn& f) const {
        Vec c = Vec::Zero(n_cols_);
        std::size_t col = 0;
        for (int n = 0; n <= n_max_; ++n)
            for (int m = -n; m <= n; ++m, ++col)
                if (n <= f.l_max()) c[col] = f.coeff(n, m);
        return c;
    }

    double weighted_norm(const SphField& f) const {
        const SphGrid& g = *st_->grid;
        double s = 0;
        for (std::size_t node = 0; node < g.size(); ++node)
            s += g.weight(int(node / g.n_az())) * std::norm(f.values[node]);
        return std::sqrt(s);
    }

    const SurfaceState& state() const { return *st_; }

  private:
    const SurfaceState* st_;
    int n_max_, n_cols_ = 0;
    SolidHarmonicTable own_table_;
    const std::vector<cplx>* ytab_ = nullptr;
    std::vector<double> rho_pow_;
};

// D[zeta] phi = (1 + |grad zeta|^2/rho^2) d_y Psi - grad zeta . grad Psi / rho^2.
inline OracleReport oracle_dn(const SurfaceState& state, const SphFn& phi, int n_max,
                              int l_out = -1, const SolidHarmonicTable* table = nullptr,
                              Vec* seed_io = nullptr) {
    const SphGrid& g = *state.grid;
    DnOracle oracle(state, n_max, table);
    OracleReport rep;
    Vec c = oracle.solve(phi, &rep.residual, &rep.cond, &rep.used_svd, 1e-12,
                         seed_io && seed_io->size() ? seed_io : nullptr);
    if (seed_io) *seed_io = c;

    SphField dy = oracle.normal_derivative(c);
    SphField surf = oracle.surface_values(c);
    SphCoeff surf_c = sph_analysis(surf, analysis_band(g, n_max + state.l_max));
    SphField grad_dot_grad(g);
    for (int j = 1; j <= 3; ++j) {
        SphField xs = sph_synthesis(apply_xj(j, surf_c), g);
        grad_dot_grad.values += state.xj_zeta[j - 1].values.cwiseProduct(xs.values);
    }
    SphField dval(g);
    for (std::size_t node = 0; node < g.size(); ++node) {
        double r2 = std::norm(state.rho.values[node].real());
        double gfac = 1.0 + state.grad_sq.values[node].real() / r2;
        dval.values[node] = gfac * dy.values[node] - grad_dot_grad.values[node] / r2;
    }
    if (l_out < 0) l_out = state.l_max + 2;
    l_out = analysis_band(g, l_out);
    rep.value = sph_to_fn(dval, l_out);
    return rep;
}

// ---------------------------------------------------------------------------
// Factorization symbols and the DN symbol lambda (Theorem 1.1).
// ---------------------------------------------------------------------------
struct DnSymbols {
    const SphGrid* grid = nullptr;
    int tw_max = 0;
    std::vector<double> y_nodes;   // Chebyshev nodes on [-1/2, 0]
    SphSymbol lambda1, lambda0;    // at y = 0
    bool pd_ok = true;             // beta2^2 + beta1 l(l+1) positive definite
    bool sylvester_ok = true;

    // Eigen-structure of beta2: beta2 = U diag(i mu) U^*.
    std::vector<std::vector<Mat>> U;              // [tw][node]
    std::vector<std::vector<Eigen::VectorXd>> mu; // [tw][node]
    const SurfaceState* state = nullptr;

    Mat lambda_tilde1(double y, int tw, std::size_t node) const {
        double b1 = state->beta1_at(y, node);
        double ll = 0.25 * double(tw) * double(tw + 2);
        const auto& m = mu[tw][node];
        Eigen::VectorXd d(m.size());
        for (Eigen::Index i = 0; i < m.size(); ++i)
            d[i] = std::sqrt(std::max(0.0, -m[i] * m[i] + b1 * ll)) / b1;
        return U[tw][node] * d.asDiagonal() * U[tw][node].adjoint();
    }
    Mat a1_at(double y, int tw, std::size_t node) const {
        double b1 = state->beta1_at(y, node);
        return beta2_block(tw, node) / b1 - lambda_tilde1(y, tw, node);
    }
    Mat A1_at(double y, int tw, std::size_t node) const {
        double b1 = state->beta1_at(y, node);
        return beta2_block(tw, node) / b1 + lambda_tilde1(y, tw, node);
    }
    Mat beta2_block(int tw, std::size_t node) const {
        const auto& m = mu[tw][node];
        Eigen::VectorXcd d(m.size());
        for (Eigen::Index i = 0; i < m.size(); ++i) d[i] = cplx(0, m[i]);
        return U[tw][node] * d.asDiagonal() * U[tw][node].adjoint();
    }
    // d/dy of A1 (analytic in beta1; beta1' = 2(rho + y)).
    Mat dyA1_at(double y, int tw, std::size_t node) const {
        double b1 = state->beta1_at(y, node);
        double b1p = 2.0 * (state->rho.values[node].real() + y);
        double ll = 0.25 * double(tw) * double(tw + 2);
        const auto& m = mu[tw][node];
        Eigen::VectorXcd d(m.size());
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            double s = std::sqrt(std::max(1e-300, -m[i] * m[i] + b1 * ll));
            // d/db1 [ (i mu)/b1 + s/b1 ] * b1'
            cplx v = -cplx(0, m[i]) / (b1 * b1);
            v += (ll / (2.0 * s) * b1 - s) / (b1 * b1);
            d[i] = v * b1p;
        }
        return U[tw][node] * d.asDiagonal() * U[tw][node].adjoint();
    }
};

struct Order0Pair {
    SphSymbol a0, A0;
    bool sylvester_ok = true;
};

// Solve the order-0 system at height y:
//   a1 A0 + a0 A1 = d_y A1 - sum_mu D_mu a1 . dpar_mu A1,  a0 + A0 = -beta3/beta1,
// via the Sylvester form a0 A1 - a1 a0 = RHS + a1 beta3/beta1 in the
// eigenbasis of beta2.
inline Order0Pair solve_order0(const DnSymbols& dn, double y, int x_band) {
    const SphGrid& g = *dn.grid;
    const SurfaceState& st = *dn.state;
    int twm = dn.tw_max;
    Order0Pair out{SphSymbol(g, twm), SphSymbol(g, twm), true};

    // Materialize a1, A1 at height y (with blocks beyond twm for stencils).
    SphSymbol a1(g, twm + 2), A1(g, twm + 2);
    for (int tw = 0; tw <= twm + 2; ++tw)
        parallel_for(g.size(), [&](std::size_t n) {
            a1.blk[tw][n] = dn.a1_at(y, tw, n);
            A1.blk[tw][n] = dn.A1_at(y, tw, n);
        });

    std::array<SphSymbol, 3> da1{rt_difference(PiTag::plus, a1),
                                 rt_difference(PiTag::minus, a1),
                                 rt_difference(PiTag::zero, a1)};
    std::array<SphSymbol, 3> dA1{x_derivative(A1, PiTag::plus, x_band),
                                 x_derivative(A1, PiTag::minus, x_band),
                                 x_derivative(A1, PiTag::zero, x_band)};

    bool sylvester_ok = true;
    for (int tw = 0; tw <= twm; ++tw) {
        double ll = 0.25 * double(tw) * double(tw + 2);
        parallel_for(g.size(), [&](std::size_t n) {
            Mat rhs = dn.dyA1_at(y, tw, n);
            for (int m = 0; m < 3; ++m) rhs -= da1[m].blk[tw][n] * dA1[m].blk[tw][n];
            double b1 = st.beta1_at(y, n);
            // beta3(y) = -Lap zeta + 2(rho + y); the Laplacian part is y-free.
            double b3 = st.beta3.values[n].real() + 2.0 * y;
            Mat C = rhs + dn.a1_at(y, tw, n) * (b3 / b1);
            // Diagonalize in the beta2 eigenbasis: a1, A1 diagonal there.
            const Mat& Un = dn.U[tw][n];
            const auto& m = dn.mu[tw][n];
            Eigen::VectorXcd a1d(m.size()), A1d(m.size());
            for (Eigen::Index i = 0; i < m.size(); ++i) {
                double s = std::sqrt(std::max(0.0, -m[i] * m[i] + b1 * ll));
                a1d[i] = (cplx(0, m[i]) - s) / b1;
                A1d[i] = (cplx(0, m[i]) + s) / b1;
            }
            Mat a0;
            if (tw == 0) {
                // Degenerate trivial block: lambda-tilde vanishes and the
                // right-hand side is zero, so the split is fixed by symmetry.
                a0 = -0.5 * (b3 / b1) * Mat::Identity(1, 1);
            } else {
                Mat Ct = Un.adjoint() * C * Un;
                Mat a0t(tw + 1, tw + 1);
                for (int i = 0; i <= tw; ++i)
                    for (int j = 0; j <= tw; ++j) {
                        cplx den = A1d[j] - a1d[i];
                        if (std::abs(den) < 1e-12) {
                            sylvester_ok = false;
                            den = 1e-12;
                        }
                        a0t(i, j) = Ct(i, j) / den;
                    }
                a0 = Un * a0t * Un.adjoint();
            }
            out.a0.blk[tw][n] = a0;
            out.A0.blk[tw][n] = -(b3 / b1) * Mat::Identity(tw + 1, tw + 1) - a0;
        });
    }
    out.sylvester_ok = sylvester_ok;
    return out;
}

// Build the factorization symbols and lambda = lambda1 + lambda0 at y = 0.
inline DnSymbols build_factorization(const SurfaceState& state, int tw_max, int x_band,
                                     int n_y_nodes = 16) {
    const SphGrid& g = *state.grid;
    DnSymbols dn;
    dn.grid = &g;
    dn.state = &state;
    dn.tw_max = tw_max;
    dn.y_nodes.resize(n_y_nodes);
    for (int k = 0; k < n_y_nodes; ++k)
        dn.y_nodes[k] = -0.25 + 0.25 * std::cos(pi * (2.0 * k + 1.0) / (2.0 * n_y_nodes));

    // Eigen-structure of beta2 on an extended range (stencil margin).
    SphSymbol b2 = state.beta2_symbol(tw_max + 4);
    dn.U.resize(tw_max + 5);
    dn.mu.resize(tw_max + 5);
    for (int tw = 0; tw <= tw_max + 4; ++tw) {
        dn.U[tw].assign(g.size(), Mat());
        dn.mu[tw].assign(g.size(), Eigen::VectorXd());
        double ll = 0.25 * double(tw) * double(tw + 2);
        parallel_for(g.size(), [&](std::size_t n) {
            Mat H = cplx(0, -1) * b2.blk[tw][n];  // Hermitian
            Eigen::SelfAdjointEigenSolver<Mat> es(H);
            dn.U[tw][n] = es.eigenvectors();
            dn.mu[tw][n] = es.eigenvalues();
            if (tw >= 2) {
                double b1 = state.beta1_at(0.0, n);
                for (Eigen::Index i = 0; i < dn.mu[tw][n].size(); ++i)
                    if (-dn.mu[tw][n][i] * dn.mu[tw][n][i] + b1 * ll <= 0) dn.pd_ok = false;
            }
        });
    }

    Order0Pair o0 = solve_order0(dn, 0.0, x_band);
    dn.sylvester_ok = o0.sylvester_ok;
    dn.lambda1 = SphSymbol(g, tw_max);
    dn.lambda0 = SphSymbol(g, tw_max);
    for (int tw = 0; tw <= tw_max; ++tw)
        parallel_for(g.size(), [&](std::size_t n) {
            double b1 = state.beta1_at(0.0, n);
            double r2 = std::norm(state.rho.values[n].real());
            dn.lambda1.blk[tw][n] = (b1 / r2) * dn.lambda_tilde1(0.0, tw, n);
            dn.lambda0.blk[tw][n] = (b1 / r2) * o0.A0.blk[tw][n];
        });
    return dn;
}

// ---------------------------------------------------------------------------
// Good unknown and the para-linearized DN value.
// ---------------------------------------------------------------------------
struct GoodUnknown {
    SphField b_frak;                  // radial boundary velocity
    std::array<SphField, 3> v_frak;   // tangential velocity, X_j components
    SphFn u;                          // phi - T_b zeta
    SphCoeff u_col;
};

inline GoodUnknown good_unknown(const SurfaceState& state, const SphFn& phi,
                                const SphFn& dn_value, int per_octave = 32) {
    const SphGrid& g = *state.grid;
    SphCoeff phic = phi.column0();
    SphField dphi = sph_synthesis(dn_value.column0(), g);
    SphField grad_zeta_phi(g);
    std::array<SphField, 3> xj_phi;
    for (int j = 1; j <= 3; ++j) {
        xj_phi[j - 1] = sph_synthesis(apply_xj(j, phic), g);
        grad_zeta_phi.values +=
            state.xj_zeta[j - 1].values.cwiseProduct(xj_phi[j - 1].values);
    }
    GoodUnknown out;
    out.b_frak = SphField(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        double r2 = std::norm(state.rho.values[n].real());
        double gfac = 1.0 + state.grad_sq.values[n].real() / r2;
        out.b_frak.values[n] =
            (dphi.values[n] + grad_zeta_phi.values[n] / r2) / gfac;
    }
    for (int j = 0; j < 3; ++j) {
        out.v_frak[j] = SphField(g);
        for (std::size_t n = 0; n < g.size(); ++n) {
            double r2 = std::norm(state.rho.values[n].real());
            out.v_frak[j].values[n] =
                (xj_phi[j].values[n] - out.b_frak.values[n] * state.xj_zeta[j].values[n]) / r2;
        }
    }
    int lb = analysis_band(g, phi.l_max() + state.l_max);
    SphCoeff bfc = sph_analysis(out.b_frak, lb);
    SphCoeff tbz = paraproduct(bfc, state.zc, g, phi.l_max(), per_octave);
    SphCoeff uc = phic;
    uc -= tbz.truncated(phi.l_max());
    out.u_col = uc;
    out.u = SphFn(uc);
    return out;
}

struct ParaDnReport {
    SphFn value;            // T_lambda(phi - T_b zeta) - T_v . grad zeta
    SphFn oracle;           // reference value
    OracleReport oracle_rep;
    double rem_s = 0;        // ||oracle - value||_{H^s}
    double rem_s_half = 0;   // ||oracle - value||_{H^{s+1/2}}
    double value_s_half = 0; // ||value||_{H^{s+1/2}} for ratios
};

inline ParaDnReport paralinearized_dn(const SurfaceState& state, const SphFn& phi,
                                      const DnSymbols& dn, const AdmissibleCutoff& chi,
                                      int n_max_oracle, double sobolev_s = 3.0,
                                      int per_octave = 32) {
    const SphGrid& g = *state.grid;
    ParaDnReport rep;
    rep.oracle_rep = oracle_dn(state, phi, n_max_oracle, analysis_band(g, phi.l_max() + state.l_max));
    rep.oracle = rep.oracle_rep.value;

    GoodUnknown gu = good_unknown(state, phi, rep.oracle, per_octave);

    SphSymbol lambda = dn.lambda1;
    lambda += dn.lambda0;
    int x_band = std::min(g.tw_tables() / 2, 2 * state.l_max + 2);
    SphSymbol lam_chi = regularize_t3(lambda, chi, x_band);
    SphField tl = quantize_t3(lam_chi, gu.u_col);

    // T_v . grad zeta = sum_j T_{v_j} X_j zeta.
    int lb = analysis_band(g, phi.l_max() + state.l_max);
    SphField tv(g);
    for (int j = 0; j < 3; ++j) {
        SphCoeff vj = sph_analysis(gu.v_frak[j], lb);
        SphCoeff xz = apply_xj(j + 1, state.zc);
        SphCoeff tvj = paraproduct(vj, xz, g, lb, per_octave);
        tv += sph_synthesis(tvj, g);
    }
    SphField val(g);
    val.values = tl.values - tv.values;
    int l_out = rep.oracle.l_max();
    rep.value = sph_to_fn(val, l_out);

    SphFn diff = rep.oracle;
    diff -= rep.value;
    rep.rem_s = diff.sobolev_norm(sobolev_s);
    rep.rem_s_half = diff.sobolev_norm(sobolev_s + 0.5);
    rep.value_s_half = rep.value.sobolev_norm(sobolev_s + 0.5);
    return rep;
}

}  // namespace paragroup
