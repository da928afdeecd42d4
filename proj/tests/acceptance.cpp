// Acceptance suite: one pass/fail line per criterion, each pinned to the
// stated tolerance. Exit code = number of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <vector>

#include "paragroup/io.hpp"
#include "paragroup/waves.hpp"

using namespace paragroup;
using clk = std::chrono::steady_clock;

namespace {

int failures = 0;

void criterion(const std::string& name, const std::function<bool(std::string&)>& body) {
    auto t0 = clk::now();
    std::string detail;
    bool ok = false;
    try {
        ok = body(detail);
    } catch (const std::exception& e) {
        detail = std::string("exception: ") + e.what();
    }
    double secs = std::chrono::duration<double>(clk::now() - t0).count();
    std::printf("%s  %-28s (%6.1f s)  %s\n", ok ? "PASS" : "FAIL", name.c_str(), secs,
                detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    double n = double(xs.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SphFn real_mode(int l_max, int n, int m, double amp) {
    SphFn f(l_max);
    if (m == 0) {
        f.coeff(n, 0) = amp;
    } else {
        f.coeff(n, m) = amp / std::sqrt(2.0);
        f.coeff(n, -m) = (m % 2 == 0 ? 1.0 : -1.0) * amp / std::sqrt(2.0);
    }
    return f;
}

char buf[256];

// 1. Plancherel and round trips, l <= 8, relative defects <= 1e-10, < 5 s.
bool ac1(std::string& detail) {
    auto t0 = clk::now();
    RepLabel L(16);
    EulerGrid g = EulerGrid::for_band(2 * L.twice_l);
    TransformPlan plan(g, L);
    SpectralFn a = SpectralFn::random(L, 0, L.twice_l, 2024);
    GridFn f = plan.inverse(a);
    double pl = std::abs(f.l2_norm() * f.l2_norm() - a.plancherel_sq()) / a.plancherel_sq();
    SpectralFn back = plan.forward(f);
    double rt = 0, scale = 0;
    for (int tw = 0; tw <= L.twice_l; ++tw) {
        rt = std::max(rt, (back.block(tw) - a.block(tw)).cwiseAbs().maxCoeff());
        scale = std::max(scale, a.block(tw).cwiseAbs().maxCoeff());
    }
    rt /= scale;
    double secs = std::chrono::duration<double>(clk::now() - t0).count();
    std::snprintf(buf, sizeof buf, "plancherel %.2e, roundtrip %.2e", pl, rt);
    detail = buf;
    return pl <= 1e-10 && rt <= 1e-10 && secs < 5.0;
}

// 2. su(2) commutators, Casimir, D_mu sigma_nu = delta Id, exact to 1e-12, l <= 4.
bool ac2(std::string& detail) {
    double worst = 0;
    for (int tw = 0; tw <= 8; ++tw) {
        RepLabel l(tw);
        Mat sp = sigma(PiTag::plus, l), sm = sigma(PiTag::minus, l), s0 = sigma(PiTag::zero, l);
        Mat id = Mat::Identity(l.dim(), l.dim());
        worst = std::max(worst, (s0 * sp - sp * s0 - sp).cwiseAbs().maxCoeff());
        worst = std::max(worst, (sm * s0 - s0 * sm - sm).cwiseAbs().maxCoeff());
        worst = std::max(worst, (sp * sm - sm * sp - 2.0 * s0).cwiseAbs().maxCoeff());
        worst = std::max(worst,
                         (-0.5 * (sm * sp + sp * sm) - s0 * s0 - laplace_multiplier(l) * id)
                             .cwiseAbs()
                             .maxCoeff());
    }
    for (PiTag mu : {PiTag::plus, PiTag::minus, PiTag::zero})
        for (PiTag nu : {PiTag::plus, PiTag::minus, PiTag::zero}) {
            MultiplierFamily s = MultiplierFamily::sigma_family(nu, 12);
            MultiplierFamily d = rt_difference(mu, s);
            for (int tw = 0; tw <= 8; ++tw) {
                Mat want = Mat::Zero(tw + 1, tw + 1);
                if (mu == nu) want = Mat::Identity(tw + 1, tw + 1);
                worst = std::max(worst, (d.blocks[tw] - want).cwiseAbs().maxCoeff());
            }
        }
    std::snprintf(buf, sizeof buf, "max defect %.2e", worst);
    detail = buf;
    return worst <= 1e-12;
}

// 3. Spectral localization: coefficients of Y_p Y_q outside [|p-q|, p+q].
bool ac3(std::string& detail) {
    SphGrid g = SphGrid::for_band(3 * 12 + 2, 3 * 12 + 2);
    double outside = 0;
    for (int p = 0; p <= 6; ++p)
        for (int q = 0; q <= 6; ++q) {
            int mp = std::min(p, 1), mq = std::min(q, 2);
            SphField yp = sph_synthesis(SphFn::basis(p, p, mp).column0(), g);
            SphField yq = sph_synthesis(SphFn::basis(q, q, mq).column0(), g);
            SphFn prod = sph_to_fn(yp * yq, p + q + 4);
            for (int l = 0; l <= prod.l_max(); ++l) {
                if (l >= std::abs(p - q) && l <= p + q) continue;
                for (int m = -l; m <= l; ++m)
                    outside = std::max(outside, std::abs(prod.coeff(l, m)));
            }
        }
    std::snprintf(buf, sizeof buf, "max leak %.2e", outside);
    detail = buf;
    return outside <= 1e-10;
}

// 4. Flat-sphere and constant-height DN multipliers.
bool ac4(std::string& detail) {
    SphGrid g = SphGrid::for_band(48, 48);
    double worst_flat = 0;
    {
        SurfaceState st(SphFn(10), g);
        for (int n = 1; n <= 8; ++n) {
            SphFn phi = real_mode(10, n, std::min(n, 1), 1.0);
            OracleReport rep = oracle_dn(st, phi, 12);
            SphFn want = phi;
            want *= cplx(double(n), 0);
            SphFn diff = rep.value;
            diff -= want;
            worst_flat = std::max(worst_flat, diff.l2_norm_mu0());
        }
    }
    double worst_const = 0;
    {
        double c = 0.2;
        SurfaceState st(SphFn::basis(4, 0, 0, cplx(c * std::sqrt(4.0 * pi), 0)), g);
        for (int n = 1; n <= 8; ++n) {
            SphFn phi = real_mode(10, n, std::min(n, 1), 1.0);
            OracleReport rep = oracle_dn(st, phi, 14);
            SphFn want = phi;
            want *= cplx(n / (1.0 + c), 0);
            SphFn diff = rep.value;
            diff -= want;
            worst_const = std::max(worst_const, diff.l2_norm_mu0());
        }
    }
    std::snprintf(buf, sizeof buf, "flat %.2e, const %.2e", worst_flat, worst_const);
    detail = buf;
    return worst_flat <= 1e-8 && worst_const <= 1e-7;
}

// 5. DN symbol at zeta = 0 from the Sylvester solve.
bool ac5(std::string& detail) {
    SphGrid g(16, 32, 52);
    SurfaceState st(SphFn(4), g);
    DnSymbols dn = build_factorization(st, 24, 12, 8);
    double defect = 0, bound = 0;
    for (int tw = 2; tw <= 24; tw += 2) {
        double l = 0.5 * tw, ll = l * (l + 1.0);
        Mat lam = dn.lambda1.blk[tw][0] + dn.lambda0.blk[tw][0];
        Mat want = (std::sqrt(ll) - 0.5) * Mat::Identity(tw + 1, tw + 1);
        defect = std::max(defect, (lam - want).cwiseAbs().maxCoeff());
        if (l >= 2 && l <= 12) bound = std::max(bound, std::abs(std::sqrt(ll) - 0.5 - l) * l);
    }
    std::snprintf(buf, sizeof buf, "defect %.2e, |lambda-l|*l <= %.3f", defect, bound);
    detail = buf;
    return defect <= 1e-10 && bound <= 0.5 && dn.pd_ok && dn.sylvester_ok;
}

// 6. Paralinearization quality at l_max = 12.
bool ac6(std::string& detail) {
    auto t0 = clk::now();
    SphGrid g = SphGrid::for_band(40, 52);
    AdmissibleCutoff chi{0.25};
    SphFn phi = real_mode(12, 3, 0, 1.0);
    auto rem_fn = [&](double eps, double* ratio) {
        SphFn zeta = real_mode(12, 2, 0, eps);
        SurfaceState st(zeta, g);
        DnSymbols dn = build_factorization(st, 26, 12, 8);
        ParaDnReport rep = paralinearized_dn(st, phi, dn, chi, 16, 3.0, 8);
        if (ratio) *ratio = rep.rem_s_half / rep.value_s_half;
        SphFn d = rep.oracle;
        d -= rep.value;
        return d;
    };
    SphFn base = rem_fn(0.0, nullptr);
    double ratio001 = 0;
    std::vector<double> eps{0.01, 0.02, 0.04};
    std::vector<SphFn> rems;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        double r = 0;
        SphFn rem = rem_fn(eps[i], i == 0 ? &ratio001 : &r);
        rem -= base;
        rems.push_back(rem);
    }
    // Quadratic residual after removing the zeroth- and first-order-in-eps
    // parts: second differences r(2e) - 2 r(e) scale like eps^2.
    SphFn d1 = rems[1];
    d1 -= rems[0];
    d1 -= rems[0];
    SphFn d2 = rems[2];
    d2 -= rems[1];
    d2 -= rems[1];
    double q1 = d1.sobolev_norm(3.5), q2 = d2.sobolev_norm(3.5);
    double slope = std::log2(q2 / q1);
    double secs = std::chrono::duration<double>(clk::now() - t0).count();
    std::snprintf(buf, sizeof buf, "slope %.2f, ratio %.4f, %.0f s", slope, ratio001, secs);
    detail = buf;
    return slope >= 1.8 && ratio001 <= 0.05 && secs < 60.0;
}

// 7. Curvature values and the linearization multiplier.
bool ac7(std::string& detail) {
    SphGrid g = SphGrid::for_band(40, 40);
    double worst_c = 0;
    for (double c : {0.1, 0.25, -0.15}) {
        SurfaceState st(SphFn::basis(2, 0, 0, cplx(c * std::sqrt(4.0 * pi), 0)), g);
        SphField H = mean_curvature(st);
        worst_c = std::max(worst_c, (H.values.array() - 2.0 / (1.0 + c)).abs().maxCoeff());
    }
    // Centered finite difference of the curvature around zero. The multiplier
    // consistent with H(c) = 2/(1+c) and with the dispersion relation
    // Lambda(n)^2 = n(n-1)(n+2) is (n-1)(n+2); see the project notes on the
    // sign conventions.
    double worst_m = 0;
    for (int n = 0; n <= 6; ++n) {
        double eps = 1e-5;
        int m = std::min(n, 1);
        SphFn mode = real_mode(8, n, m, 1.0);
        SphFn zp = mode, zm = mode;
        zp *= cplx(eps, 0);
        zm *= cplx(-eps, 0);
        SphField Hp = mean_curvature(SurfaceState(zp, g));
        SphField Hm = mean_curvature(SurfaceState(zm, g));
        SphField fd(g);
        fd.values = (Hp.values - Hm.values) / (2.0 * eps);
        SphFn lin = sph_to_fn(fd, 8);
        SphFn want = mode;
        want *= cplx(double((n - 1) * (n + 2)), 0);
        SphFn diff = lin;
        diff -= want;
        worst_m = std::max(worst_m, diff.l2_norm_mu0());
    }
    std::snprintf(buf, sizeof buf, "H(c) defect %.2e, multiplier defect %.2e", worst_c,
                  worst_m);
    detail = buf;
    return worst_c <= 1e-8 && worst_m <= 1e-6;
}

// 8. Dispersion for n = 2, 3, 4 within 2 percent.
bool ac8(std::string& detail) {
    auto t0 = clk::now();
    WaveParams params;
    params.l_max = 12;
    params.n_max_oracle = 16;
    SphGrid g = SphGrid::for_band(3 * params.l_max + 4, 3 * params.l_max + 4);
    WaveWorkspace wk(g, params);
    double worst = 0;
    for (int n : {2, 3, 4}) {
        double omega = dispersion_omega(n);
        double period = 2.0 * pi / omega;
        int spp = 96;
        double dt = period / spp;
        int steps = int(std::ceil(3.2 * period / dt));
        WaveState ws{SphFn::basis(params.l_max, n, 0, 1e-3), SphFn(params.l_max), 0.0};
        wk.oracle_seed = Vec();
        std::vector<double> series;
        for (int s = 0; s <= steps; ++s) {
            series.push_back(ws.zeta.coeff(n, 0).real());
            if (s < steps) ws = wave_step(ws, dt, wk);
        }
        double w_fit = fit_frequency(series, dt);
        worst = std::max(worst, std::abs(w_fit - omega) / omega);
    }
    double secs = std::chrono::duration<double>(clk::now() - t0).count();
    std::snprintf(buf, sizeof buf, "worst rel err %.4f, %.0f s", worst, secs);
    detail = buf;
    return worst <= 0.02 && secs < 120.0;
}

// 9. Conservation over t in [0, 0.5] at dt = 1e-3, l_max = 12.
bool ac9(std::string& detail) {
    WaveParams params;
    params.l_max = 12;
    params.n_max_oracle = 16;
    SphGrid g = SphGrid::for_band(4 * params.l_max + 8, 4 * params.l_max + 8);
    WaveWorkspace wk(g, params);
    WaveState ws{SphFn::basis(params.l_max, 2, 0, 0.01), SphFn(params.l_max), 0.0};
    ConservedQuantities q0 = conserved(ws, wk);
    double dv = 0, dh = 0, mom = 0;
    double dt = 1e-3;
    for (int s = 0; s < 500; ++s) {
        ws = wave_step(ws, dt, wk);
        if ((s + 1) % 100 == 0 || s == 499) {
            ConservedQuantities q = conserved(ws, wk);
            dv = std::max(dv, std::abs(q.volume - q0.volume) / q0.volume);
            dh = std::max(dh, std::abs(q.hamiltonian - q0.hamiltonian) /
                                  std::abs(q0.hamiltonian));
            for (double m : q.momentum) mom = std::max(mom, std::abs(m));
        }
    }
    std::snprintf(buf, sizeof buf, "vol %.2e, ham %.2e, mom %.2e", dv, dh, mom);
    detail = buf;
    return dv <= 1e-6 && dh <= 1e-4 && mom <= 1e-6;
}

// 10. Expansion orders: compose/adjoint truncations and cutoff independence.
bool ac10(std::string& detail) {
    RepLabel L(36);  // symbol band l = 18; probes go up to l = 16
    EulerGrid g = EulerGrid::for_band(2 * L.twice_l + 8);
    TransformPlan plan(g, L);
    TaylorOps ops(2);

    auto band_fn = [&](int tw_lo, int tw_hi, double decay, std::uint64_t seed, bool realify) {
        SpectralFn ch(L);
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> gauss;
        for (int tw = tw_lo; tw <= tw_hi; tw += 2) {
            RepLabel lab(tw);
            double amp = std::pow(lab.bracket(), -decay);
            for (int i = 0; i <= tw; ++i)
                for (int j = 0; j <= tw; ++j)
                    ch.block(tw)(i, j) = amp * cplx(gauss(rng), gauss(rng));
        }
        GridFn c = plan.inverse(ch);
        GridFn out(plan.grid());
        if (realify)
            out.values = c.values.real().cast<cplx>();
        else
            out.values = c.values;
        out *= cplx(1.0 / out.max_abs(), 0);
        return out;
    };

    // Compose: order-1 symbols c kappa; with smooth band-limited probes the
    // r-term truncation leaves operator order 2-(r+1), so the fitted
    // band-exponent of the residual is r-1.
    GridFn ca = band_fn(0, 2, 0.0, 11, true), cb = band_fn(0, 2, 0.0, 13, true);
    MultiplierFamily kap =
        MultiplierFamily::scalar(L.twice_l, [](RepLabel l) { return l.freq(); });
    Symbol a = Symbol::field(ca, kap, 1.0);
    Symbol b = Symbol::field(cb, kap, 1.0);
    std::vector<int> bands{8, 12, 16, 24, 32};
    bool ok = true;
    std::string msg;
    for (int r : {1, 2}) {
        Symbol ab = compose(a, b, r, ops, plan);
        std::vector<double> lx, ly;
        for (int tb : bands) {
            SpectralFn f = SpectralFn::random(L, tb, tb, 61);
            f *= cplx(1.0 / f.l2_norm(), 0);
            GridFn bf = quantize(b, f, plan);
            GridFn abf = quantize(a, plan.forward(bf), plan);
            GridFn direct = quantize(ab, f, plan);
            GridFn diff(plan.grid());
            diff.values = abf.values - direct.values;
            lx.push_back(std::log(RepLabel(tb).freq()));
            ly.push_back(std::log(plan.forward(diff).l2_norm()));
        }
        double e = -fit_slope(lx, ly);
        char t[64];
        std::snprintf(t, sizeof t, "compose r=%d exp %.2f (want %d); ", r, e, r - 1);
        msg += t;
        if (std::abs(e - (r - 1)) > 0.3) ok = false;
    }

    // Adjoint truncations on order-1 symbols with noncommutative matrix
    // parts (sigma polynomials over <l>-powers, so the expansion terminates
    // and the residual is exactly the omitted terms). Measured exponents run
    // at or above the theoretical order r + 1 - m = r: the adjoint theorems
    // are one-sided bounds and these families superconverge, so the fit is
    // asserted from below at the stated 0.3 slack.
    {
        GridFn cc = band_fn(0, 2, 0.0, 19, false);
        MultiplierFamily m2, m3;
        for (int tw = 0; tw <= L.twice_l; ++tw) {
            RepLabel l(tw);
            Mat s1 = sigma_x(1, l), s2 = sigma_x(2, l), s3 = sigma_x(3, l);
            m2.blocks.push_back(s1 * s2 / l.bracket());
            m3.blocks.push_back(s1 * s2 * s3 / (l.bracket() * l.bracket()));
        }
        for (int r : {1, 2}) {
            Symbol ac = Symbol::field(cc, r == 1 ? m2 : m3, 1.0);
            Symbol astar = adjoint_symbol(ac, r, ops, plan);
            std::vector<double> lx, ly;
            for (int tb : {8, 12, 16, 22, 30}) {
                SpectralFn f = SpectralFn::random(L, tb, tb, 71);
                SpectralFn h = SpectralFn::random(L, tb, tb, 73);
                f *= cplx(1.0 / f.l2_norm(), 0);
                h *= cplx(1.0 / h.l2_norm(), 0);
                cplx lhs = inner_product(quantize(ac, f, plan), plan.inverse(h));
                cplx rhs = inner_product(plan.inverse(f), quantize(astar, h, plan));
                lx.push_back(std::log(RepLabel(tb).freq()));
                ly.push_back(std::log(std::abs(lhs - rhs) + 1e-300));
            }
            double e = -fit_slope(lx, ly);
            char t[80];
            std::snprintf(t, sizeof t, "adjoint r=%d exp %.2f (>= %d - 0.3); ", r, e, r);
            msg += t;
            if (e < r - 0.3) ok = false;
        }
    }

    // Cutoff independence on a symbol of finite regularity: random blocks
    // with Hilbert-Schmidt amplitude <n>^{-3.5} have Zygmund regularity
    // 3.5 - 1.5 = 2, and the difference of two admissible cutoffs decays at
    // that order.
    {
        GridFn cr = band_fn(0, L.twice_l, 3.5, 17, true);
        Symbol mc = Symbol::scalar_field(cr, L.twice_l, 0.0);
        AdmissibleCutoff chi1{0.45}, chi2{0.25};
        Symbol m1 = regularize(mc, chi1, plan), m2 = regularize(mc, chi2, plan);
        std::vector<double> lx, ly;
        for (int tb : {12, 16, 24, 32}) {
            SpectralFn f = SpectralFn::random(L, tb, tb, 83);
            f *= cplx(1.0 / f.l2_norm(), 0);
            GridFn d1g = quantize(m1, f, plan);
            GridFn d2g = quantize(m2, f, plan);
            GridFn diff(plan.grid());
            diff.values = d1g.values - d2g.values;
            lx.push_back(std::log(RepLabel(tb).freq()));
            ly.push_back(std::log(plan.forward(diff).l2_norm()));
        }
        double e = -fit_slope(lx, ly);
        char t[64];
        std::snprintf(t, sizeof t, "cutoff exp %.2f (want 2)", e);
        msg += t;
        if (std::abs(e - 2.0) > 0.3) ok = false;
    }
    detail = msg;
    return ok;
}

}  // namespace

int main() {
    std::printf("acceptance criteria\n-------------------\n");
    criterion("1 plancherel/roundtrip", ac1);
    criterion("2 representation identities", ac2);
    criterion("3 spectral localization", ac3);
    criterion("4 flat/constant DN", ac4);
    criterion("5 DN symbol at zero", ac5);
    criterion("6 paralinearization quality", ac6);
    criterion("7 curvature", ac7);
    criterion("8 dispersion", ac8);
    criterion("9 conservation", ac9);
    criterion("10 calculus expansion orders", ac10);
    std::printf("-------------------\n%s (%d failed)\n",
                failures == 0 ? "ALL CRITERIA PASS" : "CRITERIA FAILED", failures);
    return failures;
}
