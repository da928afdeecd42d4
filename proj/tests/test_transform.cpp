#include <catch2/catch_amalgamated.hpp>

#include "paragroup/transform.hpp"

using namespace paragroup;

TEST_CASE("grid weights sum to one (normalized Haar)") {
    EulerGrid g(6, 9, 17);
    double s = 0;
    for (int i = 0; i < g.n_theta(); ++i) s += g.wz(i);
    CHECK(s == Catch::Approx(1.0).epsilon(1e-13));
    GridFn one = sample(g, [](const EulerPoint&) { return cplx(1, 0); });
    CHECK(std::abs(one.mean() - cplx(1, 0)) < 1e-13);
}

TEST_CASE("forward of constants and of single entries (Schur orthogonality)") {
    RepLabel L(8);
    EulerGrid g = EulerGrid::for_band(2 * L.twice_l);
    TransformPlan plan(g, L);

    GridFn one = sample(g, [](const EulerPoint&) { return cplx(1, 0); });
    SpectralFn fhat = plan.forward(one);
    CHECK(std::abs(fhat.block(0)(0, 0) - cplx(1, 0)) < 1e-12);
    double rest = 0;
    for (int tw = 1; tw <= L.twice_l; ++tw)
        rest = std::max(rest, fhat.block(tw).cwiseAbs().maxCoeff());
    CHECK(rest < 1e-12);

    // f = T^{1/2}_{nm}: single coefficient 1/(2l+1) = 1/2 at block 1/2, entry (m, n).
    RepLabel half(1);
    GridFn f = sample(g, [&](const EulerPoint& x) { return wigner_entry(half, 1, -1, x); });
    SpectralFn ft = plan.forward(f);
    CHECK(std::abs(ft.at(1, -1, 1) - cplx(0.5, 0)) < 1e-12);
    ft.at(1, -1, 1) = 0;
    double other = 0;
    for (int tw = 0; tw <= L.twice_l; ++tw)
        other = std::max(other, ft.block(tw).cwiseAbs().maxCoeff());
    CHECK(other < 1e-12);
}

TEST_CASE("inverse of a single identity block is the character") {
    RepLabel half(1);
    EulerGrid g = EulerGrid::for_band(8);
    TransformPlan plan(g, RepLabel(4));
    SpectralFn a(RepLabel(4));
    a.block(1) = Mat::Identity(2, 2);
    GridFn got = plan.inverse(a);
    GridFn want = sample(g, [&](const EulerPoint& x) {
        return 2.0 * wigner_matrix(half, x).trace();  // (2l+1) Tr T^{1/2}(x)
    });
    CHECK((got.values - want.values).cwiseAbs().maxCoeff() < 1e-12);
    // Tr T^{1/2} = 2 cos(theta/2) cos((phi+psi)/2)
    GridFn explicit_tr = sample(g, [&](const EulerPoint& x) {
        return cplx(2.0 * 2.0 * std::cos(0.5 * x.theta) * std::cos(0.5 * (x.phi + x.psi)), 0);
    });
    CHECK((got.values - explicit_tr.values).cwiseAbs().maxCoeff() < 1e-12);

    SpectralFn zero(RepLabel(4));
    CHECK(plan.inverse(zero).max_abs() == 0.0);
}

TEST_CASE("round trips forward/inverse on random band-limited data") {
    RepLabel L(12);  // l = 6
    EulerGrid g = EulerGrid::for_band(2 * L.twice_l);
    TransformPlan plan(g, L);
    SpectralFn a = SpectralFn::random(L, 0, L.twice_l, 42);

    SpectralFn back = plan.forward(plan.inverse(a));
    double defect = 0;
    for (int tw = 0; tw <= L.twice_l; ++tw)
        defect = std::max(defect, (back.block(tw) - a.block(tw)).cwiseAbs().maxCoeff());
    CHECK(defect < 1e-10);

    GridFn f = plan.inverse(a);
    GridFn f2 = plan.inverse(plan.forward(f));
    CHECK((f.values - f2.values).cwiseAbs().maxCoeff() < 1e-9 * f.max_abs());
}

TEST_CASE("Plancherel identity and Sobolev norms") {
    RepLabel L(16);  // l = 8
    EulerGrid g = EulerGrid::for_band(2 * L.twice_l);
    TransformPlan plan(g, L);
    SpectralFn a = SpectralFn::random(L, 0, L.twice_l, 7);
    GridFn f = plan.inverse(a);
    double lhs = f.l2_norm(), rhs = a.l2_norm();
    CHECK(std::abs(lhs * lhs - rhs * rhs) < 1e-10 * lhs * lhs);
    CHECK(a.sobolev_norm(0.0) == Catch::Approx(rhs));

    SpectralFn b(L);
    b.block(0)(0, 0) = 1.0;
    CHECK(b.sobolev_norm(3.7) == Catch::Approx(1.0));

    // H^1 norm of the block with c_{00}=1 at l=1, cross-checked against the
    // quadrature of |f|^2 + |grad f|^2.
    SpectralFn c(L);
    c.at(2, 0, 0) = 1.0;
    GridFn fc = plan.inverse(c);
    double h1_sq_expected = 3.0 * (1.0 + 2.0);  // (2l+1) <l>^2 |c|^2 at l=1
    CHECK(c.sobolev_norm(1.0) * c.sobolev_norm(1.0) ==
          Catch::Approx(h1_sq_expected).epsilon(1e-12));
    double l2sq = fc.l2_norm() * fc.l2_norm();
    double gradsq = 0;  // sum (2l+1) l(l+1) ||block||^2 = quadrature of |grad f|^2
    for (int tw = 0; tw <= L.twice_l; ++tw)
        gradsq += (tw + 1) * (-RepLabel(tw).laplace_eigenvalue()) * c.block(tw).squaredNorm();
    CHECK(l2sq + gradsq == Catch::Approx(h1_sq_expected).epsilon(1e-10));
}

TEST_CASE("spectral localization of products (degree bound)") {
    int tw1 = 4, tw2 = 6;  // l1 = 2, l2 = 3
    RepLabel L(tw1 + tw2 + 4);
    EulerGrid g = EulerGrid::for_band(2 * L.twice_l);
    TransformPlan plan(g, L);
    SpectralFn a = SpectralFn::random(L, tw1, tw1, 3);
    SpectralFn b = SpectralFn::random(L, tw2, tw2, 4);
    GridFn prod = plan.inverse(a) * plan.inverse(b);
    SpectralFn phat = plan.forward(prod);
    double outside = 0, inside = 0;
    for (int tw = 0; tw <= L.twice_l; ++tw) {
        double m = phat.block(tw).cwiseAbs().maxCoeff();
        if (tw < std::abs(tw1 - tw2) || tw > tw1 + tw2)
            outside = std::max(outside, m);
        else
            inside = std::max(inside, m);
    }
    CHECK(outside < 1e-10);
    CHECK(inside > 1e-3);
}

TEST_CASE("convolution duality against brute-force quadrature") {
    RepLabel L(4);
    EulerGrid g = EulerGrid::for_band(2 * L.twice_l);
    TransformPlan plan(g, L);
    SpectralFn fa = SpectralFn::random(L, 0, 3, 10);
    SpectralFn fb = SpectralFn::random(L, 0, 4, 11);
    GridFn f = plan.inverse(fa);

    std::vector<Su2> pts;
    std::vector<double> wts;
    std::vector<cplx> fv;
    for (int i = 0; i < g.n_theta(); ++i)
        for (int j = 0; j < g.n_phi(); ++j)
            for (int k = 0; k < g.n_psi(); ++k) {
                pts.push_back(su2_from_euler(g.point(i, j, k)));
                wts.push_back(g.weight(i));
                fv.push_back(f.at(i, j, k));
            }
    auto h_at = [&](const EulerPoint& p) {
        cplx hv = 0;
        for (int tw = 0; tw <= fb.tw_max(); ++tw) {
            if (fb.block(tw).isZero(0)) continue;
            hv += double(tw + 1) * (fb.block(tw) * wigner_matrix(RepLabel(tw), p)).trace();
        }
        return hv;
    };
    GridFn conv(g);
    std::size_t idx = 0;
    for (int i = 0; i < g.n_theta(); ++i)
        for (int j = 0; j < g.n_phi(); ++j)
            for (int k = 0; k < g.n_psi(); ++k, ++idx) {
                cplx s = 0;
                for (std::size_t y = 0; y < pts.size(); ++y)
                    s += wts[y] * fv[y] * h_at(euler_from_su2(pts[y].inverse() * pts[idx]));
                conv.at(i, j, k) = s;
            }
    SpectralFn got = plan.forward(conv);
    SpectralFn want = convolve(fa, fb);
    double defect = 0;
    for (int tw = 0; tw <= L.twice_l; ++tw)
        defect = std::max(defect, (got.block(tw) - want.block(tw)).cwiseAbs().maxCoeff());
    CHECK(defect < 1e-9);
}

TEST_CASE("plan rejects a grid that is too coarse") {
    EulerGrid g(3, 5, 9);
    CHECK_THROWS_AS(TransformPlan(g, RepLabel(8)), std::invalid_argument);
}
