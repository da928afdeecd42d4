#include <catch2/catch_amalgamated.hpp>

#include "paragroup/waves.hpp"

using namespace paragroup;

namespace {
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
const SphGrid& wgrid() {
    static SphGrid g(24, 48, 46);
    return g;
}
}  // namespace

TEST_CASE("mean curvature: spheres and linearization multiplier") {
    const SphGrid& g = wgrid();
    // zeta = 0: H = 2 everywhere (outward convention, static balance).
    {
        SurfaceState st(SphFn(4), g);
        SphField H = mean_curvature(st);
        CHECK((H.values.array() - 2.0).abs().maxCoeff() < 1e-12);
    }
    // zeta = c: H = 2/(1+c).
    {
        double c = 0.23;
        SurfaceState st(SphFn::basis(4, 0, 0, cplx(c * std::sqrt(4.0 * pi), 0)), g);
        SphField H = mean_curvature(st);
        CHECK((H.values.array() - 2.0 / (1.0 + c)).abs().maxCoeff() < 1e-10);
    }
    // Finite-difference linearization: (H(eps Y_n) - H(0))/eps -> (n-1)(n+2) Y_n.
    for (int n = 1; n <= 6; ++n) {
        double eps = 1e-5;
        SurfaceState st(real_mode(8, n, std::min(1, n), eps), g);
        SphField H = mean_curvature(st);
        SphFn lin = sph_to_fn(H, 8);
        lin.coeff(0, 0) -= std::sqrt(4.0 * pi) * 2.0;  // subtract H(0) = 2
        lin *= cplx(1.0 / eps, 0);
        SphFn want = real_mode(8, n, std::min(1, n), double((n - 1) * (n + 2)));
        SphFn diff = lin;
        diff -= want;
        CAPTURE(n);
        CHECK(diff.l2_norm_mu0() < 1e-4 * std::max(1.0, want.l2_norm_mu0()));
    }
}

TEST_CASE("exact curvature linearization matches finite differences") {
    const SphGrid& g = wgrid();
    SphFn zeta = real_mode(6, 2, 1, 0.08);
    zeta += real_mode(6, 3, 0, 0.05);
    SphFn w = real_mode(6, 4, 2, 1.0);
    SurfaceState st(zeta, g);
    CurvatureLinearization lin(st);
    SphField got = curvature_linearized_apply(lin, w.column0());

    double eps = 1e-5;
    SphFn zp = zeta, zm = zeta;
    SphFn we = w;
    we *= cplx(eps, 0);
    zp += we;
    zm -= we;
    SphField Hp = mean_curvature(SurfaceState(zp, g));
    SphField Hm = mean_curvature(SurfaceState(zm, g));
    SphField fd(g);
    fd.values = (Hp.values - Hm.values) / (2.0 * eps);
    CHECK((got.values - fd.values).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("curvature symbol: h2 + h1 reproduces the linearized multiplier") {
    const SphGrid& g = wgrid();
    {
        SurfaceState st(SphFn(4), g);
        DnSymbols dn = build_factorization(st, 12, 10, 4);
        CurvatureSymbol h = curvature_symbol(st, dn, 10, 10);
        for (int tw : {4, 6, 10}) {
            double ll = 0.25 * tw * (tw + 2.0);
            // h2(0,l) = l(l+1) Id; h1(0,l) = -2 Id; total = (l-1)(l+2) at integer l.
            CHECK((h.h2.blk[tw][0] - ll * Mat::Identity(tw + 1, tw + 1)).cwiseAbs().maxCoeff() <
                  1e-10);
            CHECK((h.h1.blk[tw][0] + 2.0 * Mat::Identity(tw + 1, tw + 1)).cwiseAbs().maxCoeff() <
                  1e-10);
        }
    }
    // Small zeta: Op(h) w approximates H'(zeta) w (exact symbol of the
    // linearized operator; discrepancy only through band truncation).
    {
        SphFn zeta = real_mode(6, 2, 0, 0.05);
        SurfaceState st(zeta, g);
        DnSymbols dn = build_factorization(st, 20, 14, 4);
        CurvatureSymbol h = curvature_symbol(st, dn, 20, 14);
        SphFn w = real_mode(6, 3, 1, 1.0);
        SphField via_sym = quantize_t3(h.total(), w.column0());
        CurvatureLinearization lin(st);
        SphField exact = curvature_linearized_apply(lin, w.column0());
        double scale = exact.max_abs();
        CHECK((via_sym.values - exact.values).cwiseAbs().maxCoeff() < 1e-8 * scale);
    }
}

TEST_CASE("rhs: static state and linearized single mode") {
    const SphGrid& g = wgrid();
    WaveParams params;
    params.l_max = 8;
    params.n_max_oracle = 12;
    WaveWorkspace wk(g, params);

    WaveState still{SphFn(8), SphFn(8), 0.0};
    RhsResult r0 = wave_rhs(still, wk);
    CHECK(r0.dzeta.l2_norm_mu0() < 1e-12);
    CHECK(r0.dphi.l2_norm_mu0() < 1e-10);

    double eps = 1e-4;
    int n = 3;
    WaveState lin{real_mode(8, n, 1, eps), SphFn(8), 0.0};
    RhsResult r1 = wave_rhs(lin, wk);
    CHECK(r1.dzeta.l2_norm_mu0() < 1e-6);  // O(eps^2)
    // dphi/dt = -(n-1)(n+2) eps Y_n + O(eps^2)
    SphFn want = real_mode(8, n, 1, -double((n - 1) * (n + 2)) * eps);
    SphFn diff = r1.dphi;
    diff -= want;
    CHECK(diff.l2_norm_mu0() < 20.0 * eps * eps);
}

TEST_CASE("rhs: oracle and para modes agree for small data") {
    const SphGrid& g = wgrid();
    WaveParams params;
    params.l_max = 6;
    params.n_max_oracle = 12;
    params.per_octave = 8;
    WaveWorkspace wk(g, params);
    WaveParams pp = params;
    pp.dn_mode = WaveParams::DnMode::para;
    WaveWorkspace wk_para(g, pp);

    WaveState ws{real_mode(6, 2, 0, 0.01), real_mode(6, 3, 0, 0.05), 0.0};
    RhsResult a = wave_rhs(ws, wk);
    RhsResult b = wave_rhs(ws, wk_para);
    SphFn dz = a.dzeta;
    dz -= b.dzeta;
    // The modes differ by the paralinearization remainder, small vs the value.
    CHECK(dz.l2_norm_mu0() < 0.05 * a.dzeta.l2_norm_mu0());
}

TEST_CASE("RK4 step: static fixed point and fourth-order convergence") {
    const SphGrid& g = wgrid();
    WaveParams params;
    params.l_max = 6;
    params.n_max_oracle = 10;
    WaveWorkspace wk(g, params);

    WaveState still{SphFn(6), SphFn(6), 0.0};
    WaveState s1 = wave_step(still, 1e-3, wk);
    CHECK(s1.zeta.l2_norm_mu0() < 1e-12);
    CHECK(s1.phi.l2_norm_mu0() < 1e-12);

    // Richardson: two half steps vs one full step on a small mode.
    WaveState ws{real_mode(6, 2, 0, 1e-3), SphFn(6), 0.0};
    double dt = 0.02;
    WaveState full = wave_step(ws, dt, wk);
    WaveState half = wave_step(wave_step(ws, dt / 2, wk), dt / 2, wk);
    // Error estimate via a reference with quarter steps.
    WaveState quads = ws;
    for (int i = 0; i < 4; ++i) quads = wave_step(quads, dt / 4, wk);
    auto dist = [](const WaveState& a, const WaveState& b) {
        SphFn dz = a.zeta, dp = a.phi;
        dz -= b.zeta;
        dp -= b.phi;
        return dz.l2_norm_mu0() + dp.l2_norm_mu0();
    };
    double e_full = dist(full, quads), e_half = dist(half, quads);
    CAPTURE(e_full, e_half);
    CHECK(e_full > 10.0 * e_half);  // ~16x for fourth order
}

TEST_CASE("conserved quantities: static and round spheres") {
    const SphGrid& g = wgrid();
    WaveParams params;
    params.l_max = 6;
    params.n_max_oracle = 10;
    WaveWorkspace wk(g, params);

    ConservedQuantities c0 = conserved({SphFn(6), SphFn(6), 0.0}, wk);
    CHECK(c0.volume == Catch::Approx(4.0 * pi / 3.0).epsilon(1e-12));
    CHECK(c0.area == Catch::Approx(4.0 * pi).epsilon(1e-12));
    CHECK(std::abs(c0.kinetic) < 1e-13);
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(c0.momentum[i]) < 1e-12);
        CHECK(std::abs(c0.center[i]) < 1e-12);
    }

    double cc = 0.11;
    ConservedQuantities c1 =
        conserved({SphFn::basis(6, 0, 0, cplx(cc * std::sqrt(4.0 * pi), 0)), SphFn(6), 0.0}, wk);
    CHECK(c1.volume == Catch::Approx(4.0 * pi / 3.0 * std::pow(1 + cc, 3)).epsilon(1e-10));
    CHECK(c1.area == Catch::Approx(4.0 * pi * (1 + cc) * (1 + cc)).epsilon(1e-10));
}

TEST_CASE("symmetrizer at zeta = 0: closed forms") {
    const SphGrid& g = wgrid();
    SurfaceState st(SphFn(4), g);
    DnSymbols dn = build_factorization(st, 14, 10, 4);
    CurvatureSymbol h = curvature_symbol(st, dn, 14, 10);
    SymmetrizerSet sym = symmetrizer(st, dn, h, 10);
    CHECK(sym.solve_ok);
    CHECK((sym.q.values.array() - 1.0).abs().maxCoeff() < 1e-12);
    for (int tw : {4, 8, 12}) {
        double ll = 0.25 * tw * (tw + 2.0);
        Mat want = std::pow(ll, 0.75) * Mat::Identity(tw + 1, tw + 1);
        CHECK((sym.gamma15.blk[tw][0] - want).cwiseAbs().maxCoeff() < 1e-10);
        // p05 = gamma15 q / lambda1 = (l(l+1))^{1/4}.
        Mat wp = std::pow(ll, 0.25) * Mat::Identity(tw + 1, tw + 1);
        CHECK((sym.p05.blk[tw][0] - wp).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("symmetrizer consistency: T_p T_lambda vs T_gamma T_q blockwise") {
    const SphGrid& g = wgrid();
    SphFn zeta = real_mode(4, 2, 1, 0.03);
    SurfaceState st(zeta, g);
    DnSymbols dn = build_factorization(st, 18, 10, 4);
    CurvatureSymbol h = curvature_symbol(st, dn, 18, 10);
    SymmetrizerSet sym = symmetrizer(st, dn, h, 10);

    SphSymbol lambda = dn.lambda1;
    lambda += dn.lambda0;
    SphSymbol p = sym.p05;
    p += sym.pm05;
    SphSymbol gam = sym.gamma15;
    gam += sym.gamma05;
    SphSymbol qs = SphSymbol::identity(g, 18).scaled_field(sym.q);
    SphSymbol lhs = detail::sym_compose1(p, lambda, 10);
    SphSymbol rhs = detail::sym_compose1(gam, qs, 10);
    // Agreement to two orders: the defect is order <= 0, so the relative
    // blockwise error decays like l^{-2} against the order-2 product.
    for (int tw : {8, 12, 16}) {
        double ll = 0.25 * tw * (tw + 2.0);
        double defect = 0, scale = 0;
        for (std::size_t n = 0; n < g.size(); n += 101) {
            defect = std::max(defect, (lhs.blk[tw][n] - rhs.blk[tw][n]).cwiseAbs().maxCoeff());
            scale = std::max(scale, rhs.blk[tw][n].cwiseAbs().maxCoeff());
        }
        CAPTURE(tw, defect, scale);
        CHECK(defect < 5.0 * scale / ll);
    }
}

TEST_CASE("single-mode dispersion matches the capillary relation") {
    const SphGrid& g = wgrid();
    WaveParams params;
    params.l_max = 6;
    params.n_max_oracle = 10;
    WaveWorkspace wk(g, params);
    int n = 2;
    double amp = 1e-3;
    WaveState ws{real_mode(6, n, 0, amp), SphFn(6), 0.0};
    double omega = dispersion_omega(n);  // sqrt(8)
    double period = 2.0 * pi / omega;
    double T = 3.2 * period;
    double dt = period / 160.0;
    int steps = int(T / dt);
    std::vector<double> series;
    series.reserve(steps + 1);
    for (int s = 0; s <= steps; ++s) {
        series.push_back(ws.zeta.coeff(n, 0).real());
        if (s < steps) ws = wave_step(ws, dt, wk);
    }
    double w_fit = fit_frequency(series, dt);
    CHECK(std::abs(w_fit - omega) / omega < 0.02);
}
