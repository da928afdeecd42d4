#pragma once

#include <functional>

#include "paragroup/symbol.hpp"

namespace paragroup {

// Two-variable cutoff chi(mu, lambda) enforcing the spectral condition:
// chi = 1 for |mu| <= (delta/2)<lambda>, chi = 0 for |mu| >= delta<lambda>.
// The direct form phi(|mu| / (delta <lambda>)) satisfies the support
// conditions exactly; the integral form assembles the same object from the
// continuous Littlewood-Paley ladder (completed with the low block so that
// chi(0, lambda) = 1).
struct AdmissibleCutoff {
    double delta = 0.25;
    enum class Kind { direct, integral } kind = Kind::direct;
    int per_octave = 32;

    double operator()(double mu, double lam_bracket) const {
        double m = std::abs(mu);
        if (kind == Kind::direct) return CutoffFamily::phi(m / (delta * lam_bracket));
        TLadder lad(std::max(2.0, 2.0 * lam_bracket), per_octave);
        double s = CutoffFamily::phi(2.0 * m / delta) * CutoffFamily::phi(lam_bracket);
        for (int k = 0; k < lad.blocks(); ++k)
            s += CutoffFamily::phi(2.0 * m / (delta * lad.t_mid(k))) *
                 lad.block_filter(k, lam_bracket);
        return s;
    }
};

// Regularized symbol a^chi: for each l, the x-modes eta of every coefficient
// are scaled by chi(|eta|, <l>). Output terms carry per-l coefficients.
inline Symbol regularize(const Symbol& a, const AdmissibleCutoff& chi, const TransformPlan& plan) {
    Symbol out{a.tw_max, a.order_tag, {}};
    for (const auto& t : a.terms) {
        if (t.kind == SymbolTerm::Coeff::unit) {
            out.terms.push_back(t);  // chi(0, .) = 1: x-independent terms pass through
            continue;
        }
        SymbolTerm nt;
        nt.kind = SymbolTerm::Coeff::per_l;
        nt.m = t.m;
        nt.c_l.resize(t.tw_max() + 1);
        std::optional<SpectralFn> shared_spec;
        if (t.kind == SymbolTerm::Coeff::shared) shared_spec = plan.forward(t.c);
        for (int tw = 0; tw <= t.tw_max(); ++tw) {
            double lam = RepLabel(tw).bracket();
            SpectralFn ch = shared_spec ? *shared_spec : plan.forward(t.c_l[tw]);
            SpectralFn filtered = ch.scaled([&](RepLabel eta) { return chi(eta.freq(), lam); });
            nt.c_l[tw] = plan.inverse(filtered);
        }
        out.terms.push_back(std::move(nt));
    }
    return out;
}

inline GridFn para_op(const Symbol& a, const AdmissibleCutoff& chi, const SpectralFn& f,
                      const TransformPlan& plan) {
    return quantize(regularize(a, chi, plan), f, plan);
}

// Para-product T_a u: ladder discretization of
// int [phi_{2^{-gap} t}(|nabla|) a] . [psi_t(|nabla|) u] dt/t.
inline SpectralFn paraproduct(const SpectralFn& a, const SpectralFn& u, const TransformPlan& plan,
                              int per_octave = 32, double gap_octaves = 10.0) {
    double band = std::max(2.0, 2.0 * std::max(RepLabel(a.tw_max()).freq(),
                                               RepLabel(u.tw_max()).freq()));
    TLadder lad(band, per_octave);
    double gap = std::pow(2.0, -gap_octaves);
    GridFn acc(plan.grid());
    for (int k = 0; k < lad.blocks(); ++k) {
        SpectralFn bu = ladder_block(u, lad, k);
        if (bu.plancherel_sq() == 0.0) continue;
        double T = gap * lad.t_mid(k);
        SpectralFn la = a.scaled([&](RepLabel l) { return CutoffFamily::phi(l.freq() / T); });
        if (la.plancherel_sq() == 0.0) continue;
        GridFn prod = plan.inverse(la) * plan.inverse(bu);
        acc += prod;
    }
    return plan.forward(acc);
}

// Same ladder on the sphere (column-0 data).
inline SphCoeff paraproduct(const SphCoeff& a, const SphCoeff& u, const SphGrid& grid,
                            int l_out, int per_octave = 32, double gap_octaves = 10.0) {
    double band = std::max(2.0, 2.0 * std::max(RepLabel::integer(a.l_max()).freq(),
                                               RepLabel::integer(u.l_max()).freq()));
    TLadder lad(band, per_octave);
    double gap = std::pow(2.0, -gap_octaves);
    SphField acc(grid);
    for (int k = 0; k < lad.blocks(); ++k) {
        SphCoeff bu = ladder_block(u, lad, k);
        if (bu.plancherel_sq() == 0.0) continue;
        double T = gap * lad.t_mid(k);
        SphCoeff la = a.scaled([&](RepLabel l) { return CutoffFamily::phi(l.freq() / T); });
        if (la.plancherel_sq() == 0.0) continue;
        SphField prod = sph_synthesis(la, grid) * sph_synthesis(bu, grid);
        acc += prod;
    }
    return sph_analysis(acc, l_out);
}

// Bony para-linearization of F(u): the symbol
//   l_u(x, l) = sum_k F'(phi_{t_mid,k} u (x)) B_k(|l|)
// satisfies F(u) = F(u_1) + Op(l_u) u up to the ladder's midpoint error, and
// F(u) - F(u_1) - T_{F'(u)} u is the (smoothing) Bony remainder.
struct BonyReport {
    GridFn f_of_u;          // F(u)
    GridFn f_of_u1;         // F(u_1), u_1 = phi(|nabla|) u
    double opl_residual;    // ||F(u) - F(u_1) - Op(l_u) u||_L2
    SpectralFn bony_remainder;  // F(u) - F(u_1) - T_{F'(u)} u
    Symbol l_u;
};

inline BonyReport bony_paralinearize(const std::function<cplx(cplx)>& F,
                                     const std::function<cplx(cplx)>& Fprime,
                                     const SpectralFn& u, const TransformPlan& plan,
                                     int per_octave = 32, double gap_octaves = 10.0) {
    const EulerGrid& g = plan.grid();
    double band = std::max(2.0, 2.0 * RepLabel(u.tw_max()).freq());
    TLadder lad(band, per_octave);

    GridFn ug = plan.inverse(u);
    for (Eigen::Index i = 0; i < ug.values.size(); ++i)
        if (std::abs(ug.values[i].imag()) > 1e-10 * (1.0 + std::abs(ug.values[i])))
            throw std::invalid_argument("bony_paralinearize: u must be real on the grid");

    GridFn f_of_u(g), f_of_u1(g);
    GridFn u1 = plan.inverse(low_filter(u));
    for (Eigen::Index i = 0; i < ug.values.size(); ++i) {
        f_of_u.values[i] = F(ug.values[i]);
        f_of_u1.values[i] = F(u1.values[i]);
    }

    // Op(l_u) u assembled blockwise; l_u returned as a per-l scalar symbol.
    GridFn op_lu(g);
    Symbol lu{u.tw_max(), 0.0, {}};
    SymbolTerm term;
    term.kind = SymbolTerm::Coeff::per_l;
    term.c_l.assign(u.tw_max() + 1, GridFn(g));
    term.m.reserve(u.tw_max() + 1);
    for (int tw = 0; tw <= u.tw_max(); ++tw)
        term.m.push_back(Mat::Identity(tw + 1, tw + 1));
    std::vector<GridFn> fprime_k(lad.blocks());
    for (int k = 0; k < lad.blocks(); ++k) {
        SpectralFn bu = ladder_block(u, lad, k);
        bool empty = bu.plancherel_sq() == 0.0;
        GridFn ut = plan.inverse(u.scaled(
            [&](RepLabel l) { return CutoffFamily::phi(l.freq() / lad.t_mid(k)); }));
        fprime_k[k] = GridFn(g);
        for (Eigen::Index i = 0; i < ut.values.size(); ++i)
            fprime_k[k].values[i] = Fprime(ut.values[i]);
        if (!empty) {
            GridFn prod = fprime_k[k] * plan.inverse(bu);
            op_lu += prod;
        }
        for (int tw = 0; tw <= u.tw_max(); ++tw) {
            double w = lad.block_filter(k, RepLabel(tw).freq());
            if (w != 0.0) term.c_l[tw].values += w * fprime_k[k].values;
        }
    }
    lu.terms.push_back(std::move(term));

    GridFn resid(g);
    resid.values = f_of_u.values - f_of_u1.values - op_lu.values;
    double opl_residual = resid.l2_norm();

    GridFn fprime_u(g);
    for (Eigen::Index i = 0; i < ug.values.size(); ++i)
        fprime_u.values[i] = Fprime(ug.values[i]);
    SpectralFn t_fp_u =
        paraproduct(plan.forward(fprime_u), u, plan, per_octave, gap_octaves);
    GridFn brem(g);
    brem.values = f_of_u.values - f_of_u1.values;
    SpectralFn bony_rem = plan.forward(brem) - t_fp_u;

    return {std::move(f_of_u), std::move(f_of_u1), opl_residual, std::move(bony_rem),
            std::move(lu)};
}

}  // namespace paragroup
