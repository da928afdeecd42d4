#pragma once

#include "paragroup/dno.hpp"

namespace paragroup {

// ---------------------------------------------------------------------------
// Mean curvature of the graph rho = 1 + zeta over the unit sphere, with the
// outward-normal convention fixed by H(0) = 2 (static balance with p_e = -2):
//   H = sqrt(beta1)/rho^2 + 1/sqrt(beta1)
//       - (1/rho^2) [ rho Lap zeta / sqrt(beta1) + grad zeta . grad(rho/sqrt(beta1)) ].
// ---------------------------------------------------------------------------
inline SphField mean_curvature(const SurfaceState& st, int work_band = -1) {
    const SphGrid& g = *st.grid;
    if (work_band < 0) work_band = std::min(g.tw_tables() / 2, g.exact_product_degree() / 2);
    SphField s(g), w(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        double b1 = st.beta1.values[n].real();
        s.values[n] = std::sqrt(b1);
        w.values[n] = st.rho.values[n].real() / std::sqrt(b1);
    }
    // grad zeta . grad (rho/sqrt(beta1)))
    SphCoeff wc = sph_analysis(w, work_band);
    SphField gw(g);
    for (int j = 1; j <= 3; ++j) {
        SphField xw = sph_synthesis(apply_xj(j, wc), g);
        gw.values += st.xj_zeta[j - 1].values.cwiseProduct(xw.values);
    }
    SphField lap_zeta(g);
    lap_zeta.values = 2.0 * st.rho.values - st.beta3.values;  // beta3 = -Lap + 2 rho
    SphField H(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        double rho = st.rho.values[n].real(), r2 = rho * rho;
        double sv = s.values[n].real();
        cplx val = sv / r2 + 1.0 / sv -
                   (rho * lap_zeta.values[n] / sv + gw.values[n]) / r2;
        H.values[n] = val;
    }
    return H;
}

inline SphFn mean_curvature_fn(const SurfaceState& st, int l_out) {
    return sph_to_fn(mean_curvature(st), l_out);
}

// Exact linearization H'(zeta) w, assembled from the variation of the
// curvature formula:
//   H' w = -(1/(rho s)) Lap w + (1/(rho s^3)) (G.grad)(G.grad w)
//          + P (G.grad w) + B . grad w + c w,   G = grad zeta, s = sqrt(beta1).
struct CurvatureLinearization {
    const SurfaceState* st;
    SphField P, c;                 // scalar coefficient fields
    std::array<SphField, 3> B;     // plain-gradient coefficient
    int band;

    explicit CurvatureLinearization(const SurfaceState& state, int work_band = -1)
        : st(&state) {
        const SphGrid& g = *state.grid;
        band = work_band < 0
                   ? std::min(g.tw_tables() / 2, g.exact_product_degree() / 2)
                   : work_band;
        SphField s(g), rho_over_s(g), gg_over_s3(g);
        for (std::size_t n = 0; n < g.size(); ++n) {
            double b1 = state.beta1.values[n].real();
            double sv = std::sqrt(b1);
            s.values[n] = sv;
            rho_over_s.values[n] = state.rho.values[n].real() / sv;
            gg_over_s3.values[n] = state.grad_sq.values[n].real() / (sv * sv * sv);
        }
        SphField rho_over_s3(g);
        for (std::size_t n = 0; n < g.size(); ++n)
            rho_over_s3.values[n] =
                state.rho.values[n].real() / std::pow(s.values[n].real(), 3);

        auto grad_fields = [&](const SphField& f) {
            SphCoeff fc = sph_analysis(f, band);
            std::array<SphField, 3> out;
            for (int j = 1; j <= 3; ++j) out[j - 1] = sph_synthesis(apply_xj(j, fc), g);
            return out;
        };
        auto dot_G = [&](const std::array<SphField, 3>& v) {
            SphField out(g);
            for (int j = 0; j < 3; ++j)
                out.values += state.xj_zeta[j].values.cwiseProduct(v[j].values);
            return out;
        };
        std::array<SphField, 3> grad_rs = grad_fields(rho_over_s);
        std::array<SphField, 3> grad_rs3 = grad_fields(rho_over_s3);
        std::array<SphField, 3> grad_gg3 = grad_fields(gg_over_s3);
        SphField G_rs = dot_G(grad_rs);
        SphField G_rs3 = dot_G(grad_rs3);
        SphField G_gg3 = dot_G(grad_gg3);
        SphField lap_zeta(g);
        lap_zeta.values = 2.0 * state.rho.values - state.beta3.values;

        P = SphField(g);
        c = SphField(g);
        for (int j = 0; j < 3; ++j) B[j] = SphField(g);
        for (std::size_t n = 0; n < g.size(); ++n) {
            double rho = state.rho.values[n].real(), r2 = rho * rho, r3 = r2 * rho;
            double sv = s.values[n].real(), s3 = sv * sv * sv;
            double gg = state.grad_sq.values[n].real();
            cplx lz = lap_zeta.values[n];
            P.values[n] = 1.0 / (sv * r2) - 1.0 / s3 + lz / (rho * s3) - gg / (r2 * s3) +
                          G_rs3.values[n] / r2;
            c.values[n] = 1.0 / (sv * rho) - 2.0 * sv / r3 - rho / s3 +
                          lz * (1.0 / (r2 * sv) + 1.0 / s3) +
                          2.0 * G_rs.values[n] / r3 - G_gg3.values[n] / r2;
            for (int j = 0; j < 3; ++j) B[j].values[n] = -grad_rs[j].values[n] / r2;
        }
    }

};

// Out-of-class apply that keeps the X_j w fields alive for the B-dot.
inline SphField curvature_linearized_apply(const CurvatureLinearization& lin,
                                           const SphCoeff& wc) {
    const SurfaceState& st = *lin.st;
    const SphGrid& g = *st.grid;
    std::array<SphField, 3> xw;
    SphField Gw(g);
    for (int j = 1; j <= 3; ++j) {
        xw[j - 1] = sph_synthesis(apply_xj(j, wc), g);
        Gw.values += st.xj_zeta[j - 1].values.cwiseProduct(xw[j - 1].values);
    }
    SphCoeff Gwc = sph_analysis(Gw, lin.band);
    SphField GGw(g);
    for (int j = 1; j <= 3; ++j) {
        SphField t = sph_synthesis(apply_xj(j, Gwc), g);
        GGw.values += st.xj_zeta[j - 1].values.cwiseProduct(t.values);
    }
    SphField lap_w = sph_synthesis(laplace(wc), g);
    SphField w = sph_synthesis(wc, g);
    SphField out(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        double rho = st.rho.values[n].real();
        double sv = std::sqrt(st.beta1.values[n].real());
        cplx v = -lap_w.values[n] / (rho * sv) + GGw.values[n] / (rho * sv * sv * sv);
        v += lin.P.values[n] * Gw.values[n] + lin.c.values[n] * w.values[n];
        for (int j = 0; j < 3; ++j) v += lin.B[j].values[n] * xw[j].values[n];
        out.values[n] = v;
    }
    return out;
}

// Para-linearization symbol of the curvature: h = h2 + h1 with
// h2 = (beta2^2 + beta1 l(l+1)) / (rho beta1^{3/2}) = rho^3 beta1^{-3/2} lambda1^2
// and h1 the exact first/zeroth-order remainder of sigma[H'(zeta)].
struct CurvatureSymbol {
    SphSymbol h2, h1;
    SphSymbol total() const {
        SphSymbol h = h2;
        h += h1;
        return h;
    }
};

inline CurvatureSymbol curvature_symbol(const SurfaceState& st, const DnSymbols& dn,
                                        int tw_max, int x_band) {
    const SphGrid& g = *st.grid;
    CurvatureLinearization lin(st, x_band);
    CurvatureSymbol out;
    out.h2 = SphSymbol(g, tw_max);
    out.h1 = SphSymbol(g, tw_max);

    // beta2 blocks (+ margin for the D-stencil of the A^2 cross term).
    SphSymbol b2 = st.beta2_symbol(tw_max + 2);
    std::array<SphSymbol, 3> db2{rt_difference(PiTag::plus, b2),
                                 rt_difference(PiTag::minus, b2),
                                 rt_difference(PiTag::zero, b2)};
    std::array<SphSymbol, 3> pb2{x_derivative(b2, PiTag::plus, x_band),
                                 x_derivative(b2, PiTag::minus, x_band),
                                 x_derivative(b2, PiTag::zero, x_band)};

    for (int tw = 0; tw <= tw_max; ++tw) {
        double ll = 0.25 * double(tw) * double(tw + 2);
        std::array<Mat, 3> sx{sigma_x(1, RepLabel(tw)), sigma_x(2, RepLabel(tw)),
                              sigma_x(3, RepLabel(tw))};
        parallel_for(g.size(), [&](std::size_t n) {
            double rho = st.rho.values[n].real();
            double b1 = st.beta1.values[n].real();
            double s3 = std::pow(std::sqrt(b1), 3);
            Mat B2 = b2.blk[tw][n];
            out.h2.blk[tw][n] =
                (B2 * B2 + b1 * ll * Mat::Identity(tw + 1, tw + 1)) / (rho * s3);
            Mat h1 = Mat::Zero(tw + 1, tw + 1);
            for (int m = 0; m < 3; ++m) h1 += db2[m].blk[tw][n] * pb2[m].blk[tw][n];
            h1 /= (rho * s3);
            for (int j = 0; j < 3; ++j) {
                cplx wj = lin.P.values[n] * st.xj_zeta[j].values[n] + lin.B[j].values[n];
                h1 += wj * sx[j];
            }
            h1 += lin.c.values[n] * Mat::Identity(tw + 1, tw + 1);
            out.h1.blk[tw][n] = h1;
        });
    }
    (void)dn;
    return out;
}

// ---------------------------------------------------------------------------
// Symmetrizer (gamma, p, q): gamma^2 matches (T_h T_lambda + adj)/2 to two
// orders, q = rho^{-1/3} sqrt(beta1), p solves T_p T_lambda = T_gamma T_q to
// two orders. Modes l in {0, 1} pass through undiagonalized.
// ---------------------------------------------------------------------------
namespace detail {
// One-order composition a # b = ab + sum_mu D_mu a . Pi_mu b.
inline SphSymbol sym_compose1(const SphSymbol& a, const SphSymbol& b, int x_band) {
    SphSymbol prod = a * b;
    std::array<SphSymbol, 3> da{rt_difference(PiTag::plus, a), rt_difference(PiTag::minus, a),
                                rt_difference(PiTag::zero, a)};
    std::array<SphSymbol, 3> pb{x_derivative(b, PiTag::plus, x_band),
                                x_derivative(b, PiTag::minus, x_band),
                                x_derivative(b, PiTag::zero, x_band)};
    for (int m = 0; m < 3; ++m) prod += da[m] * pb[m];
    return prod;
}
inline SphSymbol sym_adjoint1(const SphSymbol& a, int x_band) {
    SphSymbol astar(*a.grid, a.tw_max);
    for (int tw = 0; tw <= a.tw_max; ++tw)
        for (std::size_t n = 0; n < a.blk[tw].size(); ++n)
            astar.blk[tw][n] = a.blk[tw][n].adjoint();
    SphSymbol out = astar;
    for (PiTag mu : {PiTag::plus, PiTag::minus, PiTag::zero})
        out += rt_difference(mu, x_derivative(astar, mu, x_band));
    return out;
}
}  // namespace detail

struct SymmetrizerSet {
    SphSymbol gamma15, gamma05;  // orders 3/2 and 1/2
    SphField q;                  // scalar function
    SphSymbol p05, pm05;         // orders 1/2 and -1/2
    bool solve_ok = true;
};

inline SymmetrizerSet symmetrizer(const SurfaceState& st, const DnSymbols& dn,
                                  const CurvatureSymbol& h, int x_band) {
    const SphGrid& g = *st.grid;
    int twm = std::min(dn.lambda1.tw_max, h.h2.tw_max);
    SymmetrizerSet out;
    out.q = SphField(g);
    for (std::size_t n = 0; n < g.size(); ++n)
        out.q.values[n] = std::pow(st.rho.values[n].real(), -1.0 / 3.0) *
                          std::sqrt(st.beta1.values[n].real());

    // gamma_{1.5} = sqrt(lambda1 h2): diagonal in the beta2 eigenbasis.
    out.gamma15 = SphSymbol(g, twm);
    for (int tw = 0; tw <= twm; ++tw) {
        double ll = 0.25 * double(tw) * double(tw + 2);
        parallel_for(g.size(), [&](std::size_t n) {
            double rho = st.rho.values[n].real();
            double b1 = st.beta1.values[n].real();
            const auto& m = dn.mu[tw][n];
            Eigen::VectorXd d(m.size());
            for (Eigen::Index i = 0; i < m.size(); ++i) {
                double t = std::max(0.0, -m[i] * m[i] + b1 * ll);
                d[i] = std::pow(t, 0.75) / (std::pow(rho, 1.5) * std::pow(b1, 0.75));
            }
            out.gamma15.blk[tw][n] =
                dn.U[tw][n] * d.asDiagonal() * dn.U[tw][n].adjoint();
        });
    }

    // Gamma^2 symbol to two orders; then gamma_{0.5} from the anticommutator.
    SphSymbol lambda = dn.lambda1;
    lambda += dn.lambda0;
    SphSymbol hh = h.total();
    SphSymbol g2 = detail::sym_compose1(hh, lambda, x_band);
    g2 += detail::sym_compose1(detail::sym_adjoint1(lambda, x_band),
                               detail::sym_adjoint1(hh, x_band), x_band);
    g2 = g2.scaled([](RepLabel) { return 0.5; });
    SphSymbol gg = detail::sym_compose1(out.gamma15, out.gamma15, x_band);
    g2 -= gg;  // residual to be matched by {gamma15, gamma05}
    out.gamma05 = SphSymbol(g, twm);
    bool ok = true;
    for (int tw = 0; tw <= twm; ++tw)
        parallel_for(g.size(), [&](std::size_t n) {
            const Mat& Un = dn.U[tw][n];
            Mat R = Un.adjoint() * g2.blk[tw][n] * Un;
            Mat gd = Un.adjoint() * out.gamma15.blk[tw][n] * Un;  // diagonal
            Mat sol(tw + 1, tw + 1);
            for (int i = 0; i <= tw; ++i)
                for (int j = 0; j <= tw; ++j) {
                    double den = gd(i, i).real() + gd(j, j).real();
                    if (den < 1e-9) {
                        sol(i, j) = 0;  // l in {0,1}: passthrough, not diagonalized
                        if (tw >= 4) ok = false;
                    } else {
                        sol(i, j) = R(i, j) / den;
                    }
                }
            out.gamma05.blk[tw][n] = Un * sol * Un.adjoint();
        });
    out.solve_ok = ok;

    // p_{0.5} = gamma15 q / lambda1; next order from the remaining terms.
    out.p05 = SphSymbol(g, twm);
    out.pm05 = SphSymbol(g, twm);
    SphSymbol qsym = SphSymbol::identity(g, twm).scaled_field(out.q);
    std::array<SphSymbol, 3> dg{rt_difference(PiTag::plus, out.gamma15),
                                rt_difference(PiTag::minus, out.gamma15),
                                rt_difference(PiTag::zero, out.gamma15)};
    std::array<SphSymbol, 3> pq{x_derivative(qsym, PiTag::plus, x_band),
                                x_derivative(qsym, PiTag::minus, x_band),
                                x_derivative(qsym, PiTag::zero, x_band)};
    for (int tw = 0; tw <= twm; ++tw) {
        double ll = 0.25 * double(tw) * double(tw + 2);
        parallel_for(g.size(), [&](std::size_t n) {
            if (tw < 4) {  // l in {0,1}: pass through undiagonalized
                out.p05.blk[tw][n] = Mat::Identity(tw + 1, tw + 1);
                out.pm05.blk[tw][n] = Mat::Zero(tw + 1, tw + 1);
                return;
            }
            double rho = st.rho.values[n].real();
            double b1 = st.beta1.values[n].real();
            const auto& m = dn.mu[tw][n];
            const Mat& Un = dn.U[tw][n];
            Eigen::VectorXd lam1_inv(m.size()), g15(m.size());
            for (Eigen::Index i = 0; i < m.size(); ++i) {
                double t = std::max(1e-12, -m[i] * m[i] + b1 * ll);
                lam1_inv[i] = (rho * rho) / std::sqrt(t);
                g15[i] = std::pow(t, 0.75) / (std::pow(rho, 1.5) * std::pow(b1, 0.75));
            }
            // p05 = gamma15 q lambda1^{-1}: diagonal functions times q(x).
            Eigen::VectorXcd p05d(m.size());
            for (Eigen::Index i = 0; i < m.size(); ++i)
                p05d[i] = out.q.values[n] * g15[i] * lam1_inv[i];
            out.p05.blk[tw][n] = Un * p05d.asDiagonal() * Un.adjoint();
            // pm05 = [gamma05 q + sum D gamma15 Pi q - p05 lambda0
            //         - sum D p05 Pi lambda1] lambda1^{-1}
            Mat num = out.gamma05.blk[tw][n] * out.q.values[n];
            for (int mu = 0; mu < 3; ++mu) num += dg[mu].blk[tw][n] * pq[mu].blk[tw][n];
            num -= out.p05.blk[tw][n] * dn.lambda0.blk[tw][n];
            Mat lam1inv_m = Un * lam1_inv.cast<cplx>().asDiagonal() * Un.adjoint();
            out.pm05.blk[tw][n] = num * lam1inv_m;
        });
    }
    // The D p05 Pi lambda1 cross-term needs p05 everywhere first; second pass.
    std::array<SphSymbol, 3> dp{rt_difference(PiTag::plus, out.p05),
                                rt_difference(PiTag::minus, out.p05),
                                rt_difference(PiTag::zero, out.p05)};
    std::array<SphSymbol, 3> pl{x_derivative(dn.lambda1, PiTag::plus, x_band),
                                x_derivative(dn.lambda1, PiTag::minus, x_band),
                                x_derivative(dn.lambda1, PiTag::zero, x_band)};
    for (int tw = 4; tw <= twm; ++tw) {
        double ll = 0.25 * double(tw) * double(tw + 2);
        parallel_for(g.size(), [&](std::size_t n) {
            double rho = st.rho.values[n].real();
            double b1 = st.beta1.values[n].real();
            const auto& m = dn.mu[tw][n];
            const Mat& Un = dn.U[tw][n];
            Eigen::VectorXd lam1_inv(m.size());
            for (Eigen::Index i = 0; i < m.size(); ++i)
                lam1_inv[i] = (rho * rho) /
                              std::sqrt(std::max(1e-12, -m[i] * m[i] + b1 * ll));
            Mat lam1inv_m = Un * lam1_inv.cast<cplx>().asDiagonal() * Un.adjoint();
            Mat cross = Mat::Zero(tw + 1, tw + 1);
            for (int mu = 0; mu < 3; ++mu) cross += dp[mu].blk[tw][n] * pl[mu].blk[tw][n];
            out.pm05.blk[tw][n] -= cross * lam1inv_m;
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Wave state and the capillary system RHS (sigma0/rho0 = 1, p_e = -2):
//   d zeta/dt = D[zeta] phi
//   d phi/dt  = -|grad phi|^2/(2 rho^2)
//               + (rho^2 D phi + grad zeta . grad phi)^2 / (2 beta1 rho^2)
//               - (H(zeta) + p_e).
// ---------------------------------------------------------------------------
struct WaveParams {
    int l_max = 12;
    int n_max_oracle = 16;
    double p_e = -2.0;
    double smallness_gate = 0.1;  // |zeta|_{C1} gate for the symbol pipeline
    int per_octave = 32;
    enum class DnMode { oracle, para } dn_mode = DnMode::oracle;
};

struct WaveState {
    SphFn zeta, phi;
    double t = 0;
};

struct WaveWorkspace {
    const SphGrid* grid;
    WaveParams params;
    std::optional<AdmissibleCutoff> chi;
    SolidHarmonicTable ytable;
    mutable Vec oracle_seed;  // warm start between consecutive evaluations

    WaveWorkspace(const SphGrid& g, const WaveParams& p)
        : grid(&g), params(p), ytable(g, p.n_max_oracle) {
        chi = AdmissibleCutoff{0.25};
    }
};

struct RhsResult {
    SphFn dzeta, dphi;
    double oracle_residual = 0;
};

inline RhsResult wave_rhs(const WaveState& ws, const WaveWorkspace& wk) {
    const SphGrid& g = *wk.grid;
    int L = wk.params.l_max;
    SurfaceState st(ws.zeta, g);

    SphFn dn_value(L);
    double resid = 0;
    OracleReport orep = oracle_dn(st, ws.phi, wk.params.n_max_oracle, L,
                                  &wk.ytable, &wk.oracle_seed);
    resid = orep.residual;
    if (wk.params.dn_mode == WaveParams::DnMode::para) {
        if (st.zeta_c1 > wk.params.smallness_gate)
            throw std::runtime_error("wave_rhs: |zeta|_C1 above the para-mode gate");
        DnSymbols dn = build_factorization(st, 2 * L + 2, 2 * st.l_max + 2);
        ParaDnReport rep = paralinearized_dn(st, ws.phi, dn, *wk.chi,
                                             wk.params.n_max_oracle, 3.0,
                                             wk.params.per_octave);
        dn_value = rep.value.truncated_fn(L);
    } else {
        dn_value = orep.value.truncated_fn(L);
    }

    // phi equation, evaluated pointwise and projected back to the band.
    SphField Dg = sph_synthesis(dn_value.column0(), g);
    SphCoeff phic = ws.phi.column0();
    SphField grad_phi_sq(g), grad_zeta_phi(g);
    {
        std::array<SphField, 3> xj;
        for (int j = 1; j <= 3; ++j) xj[j - 1] = sph_synthesis(apply_xj(j, phic), g);
        for (int j = 0; j < 3; ++j) {
            grad_phi_sq.values += xj[j].values.cwiseProduct(xj[j].values);
            grad_zeta_phi.values += st.xj_zeta[j].values.cwiseProduct(xj[j].values);
        }
    }
    SphField H = mean_curvature(st);
    SphField dphi_g(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        double rho = st.rho.values[n].real(), r2 = rho * rho;
        double b1 = st.beta1.values[n].real();
        cplx quad = -grad_phi_sq.values[n] / (2.0 * r2) +
                    (r2 * Dg.values[n] + grad_zeta_phi.values[n]) *
                        (r2 * Dg.values[n] + grad_zeta_phi.values[n]) / (2.0 * b1 * r2);
        dphi_g.values[n] = quad - (H.values[n] + wk.params.p_e);
    }
    RhsResult out;
    out.dzeta = dn_value;
    out.dphi = sph_to_fn(dphi_g, L);
    out.oracle_residual = resid;
    return out;
}

// Classical RK4 step on the coefficient tables.
inline WaveState wave_step(const WaveState& ws, double dt, const WaveWorkspace& wk) {
    auto axpy = [](const WaveState& base, double a, const RhsResult& k) {
        WaveState out = base;
        SphFn dz = k.dzeta, dp = k.dphi;
        dz *= cplx(a, 0);
        dp *= cplx(a, 0);
        out.zeta += dz;
        out.phi += dp;
        return out;
    };
    RhsResult k1 = wave_rhs(ws, wk);
    WaveState s2 = axpy(ws, 0.5 * dt, k1);
    RhsResult k2 = wave_rhs(s2, wk);
    WaveState s3 = axpy(ws, 0.5 * dt, k2);
    RhsResult k3 = wave_rhs(s3, wk);
    WaveState s4 = axpy(ws, dt, k3);
    RhsResult k4 = wave_rhs(s4, wk);
    WaveState out = ws;
    auto acc = [&](SphFn& tgt, const SphFn& a, const SphFn& b, const SphFn& c, const SphFn& d) {
        for (int l = 0; l <= tgt.l_max(); ++l)
            for (int mu = -l; mu <= l; ++mu)
                tgt.coeff(l, mu) += dt / 6.0 *
                                    (a.coeff(l, mu) + 2.0 * b.coeff(l, mu) +
                                     2.0 * c.coeff(l, mu) + d.coeff(l, mu));
    };
    acc(out.zeta, k1.dzeta, k2.dzeta, k3.dzeta, k4.dzeta);
    acc(out.phi, k1.dphi, k2.dphi, k3.dphi, k4.dphi);
    out.t = ws.t + dt;
    return out;
}

struct ConservedQuantities {
    double volume = 0;       // int (1+zeta)^3 / 3 dmu0
    double area = 0;         // area of the surface
    double kinetic = 0;      // 1/2 int phi D[zeta]phi (1+zeta)^2 dmu0
    double kinetic_paper = 0;  // variant weighted by beta1 instead of rho^2
    double hamiltonian = 0;  // area + kinetic
    std::array<double, 3> momentum{0, 0, 0};
    std::array<double, 3> center{0, 0, 0};
};

inline ConservedQuantities conserved(const WaveState& ws, const WaveWorkspace& wk) {
    const SphGrid& g = *wk.grid;
    SurfaceState st(ws.zeta, g);
    OracleReport orep =
        oracle_dn(st, ws.phi, wk.params.n_max_oracle, wk.params.l_max, &wk.ytable);
    SphField D = sph_synthesis(orep.value.column0(), g);
    SphField phi_g = sph_synthesis(ws.phi.column0(), g);

    ConservedQuantities out;
    SphField vol(g), area(g), kin(g), kin2(g);
    for (std::size_t n = 0; n < g.size(); ++n) {
        double rho = st.rho.values[n].real();
        double b1 = st.beta1.values[n].real();
        vol.values[n] = rho * rho * rho / 3.0;
        area.values[n] = rho * std::sqrt(b1);
        cplx pd = phi_g.values[n] * D.values[n];
        kin.values[n] = 0.5 * pd * (rho * rho);
        kin2.values[n] = 0.5 * pd * b1;
    }
    out.volume = vol.integral_mu0().real();
    out.area = area.integral_mu0().real();
    out.kinetic = kin.integral_mu0().real();
    out.kinetic_paper = kin2.integral_mu0().real();
    out.hamiltonian = out.area + out.kinetic;

    // Momentum: int phi rho (rho N0 - grad zeta) dmu0, componentwise via the
    // tangential gradients of the linear functions x_i.
    for (int comp = 0; comp < 3; ++comp) {
        SphFn ell(1);
        // x_i restricted to S^2 in the Y basis: x = sqrt(2pi/3)(Y_1^{-1} - Y_1^1),
        // y = i sqrt(2pi/3)(Y_1^{-1} + Y_1^1), z = sqrt(4pi/3) Y_1^0.
        double a = std::sqrt(2.0 * pi / 3.0);
        if (comp == 0) {
            ell.coeff(1, -1) = a;
            ell.coeff(1, 1) = -a;
        } else if (comp == 1) {
            ell.coeff(1, -1) = cplx(0, 1) * a;
            ell.coeff(1, 1) = cplx(0, 1) * a;
        } else {
            ell.coeff(1, 0) = std::sqrt(4.0 * pi / 3.0);
        }
        SphCoeff ec = ell.column0();
        SphField n0(g), gze(g);
        for (std::size_t n = 0; n < g.size(); ++n) {
            auto v = g.unit_normal(int(n / g.n_az()), int(n % g.n_az()));
            n0.values[n] = v[comp];
        }
        for (int j = 1; j <= 3; ++j) {
            SphField xe = sph_synthesis(apply_xj(j, ec), g);
            gze.values += st.xj_zeta[j - 1].values.cwiseProduct(xe.values);
        }
        SphField mom(g), cen(g);
        for (std::size_t n = 0; n < g.size(); ++n) {
            double rho = st.rho.values[n].real();
            mom.values[n] = phi_g.values[n] * rho * (rho * n0.values[n] - gze.values[n]);
            cen.values[n] = std::pow(rho, 4) * n0.values[n];
        }
        out.momentum[comp] = mom.integral_mu0().real();
        out.center[comp] = cen.integral_mu0().real();
    }
    return out;
}

// Frequency of a sampled oscillation by periodogram maximization with a
// parabolic refinement.
inline double fit_frequency(const std::vector<double>& samples, double dt) {
    std::size_t n = samples.size();
    double mean = 0;
    for (double s : samples) mean += s;
    mean /= double(n);
    auto power = [&](double w) {
        cplx acc = 0;
        for (std::size_t j = 0; j < n; ++j)
            acc += (samples[j] - mean) * std::polar(1.0, -w * dt * double(j));
        return std::norm(acc);
    };
    double w_max = pi / dt;
    double best_w = 0, best_p = -1;
    int grid_n = 4000;
    for (int k = 1; k < grid_n; ++k) {
        double w = w_max * k / grid_n;
        double p = power(w);
        if (p > best_p) {
            best_p = p;
            best_w = w;
        }
    }
    double h = w_max / grid_n;
    for (int it = 0; it < 60; ++it) {
        double pm = power(best_w - h), p0 = power(best_w), pp = power(best_w + h);
        double denom = pm - 2 * p0 + pp;
        if (std::abs(denom) > 0) {
            double shift = 0.5 * (pm - pp) / denom;
            best_w += std::clamp(shift, -1.0, 1.0) * h;
        }
        h *= 0.5;
    }
    return best_w;
}

inline double dispersion_omega(int n) {
    return std::sqrt(double(n) * (n - 1.0) * (n + 2.0));
}

}  // namespace paragroup
