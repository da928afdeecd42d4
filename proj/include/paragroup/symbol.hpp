#pragma once

#include <optional>
#include <vector>

#include "paragroup/diffops.hpp"
#include "paragroup/lp.hpp"

namespace paragroup {

// Symbols a(x, l) on the full group, stored as sums of separable terms
// c(x) * M(l). The class is closed under products, RT differences (which act
// on M), x-derivatives (which act on c), and adjoints; regularization
// produces per-l coefficient fields. Quantization, composition and adjoint
// expansions stay cheap in this form.
struct SymbolTerm {
    enum class Coeff { unit, shared, per_l };
    Coeff kind = Coeff::unit;
    GridFn c;                  // if shared
    std::vector<GridFn> c_l;   // if per_l, indexed by tw
    std::vector<Mat> m;        // per tw = 0..tw_max

    int tw_max() const { return int(m.size()) - 1; }
    const GridFn* coeff_at(int tw) const {
        switch (kind) {
            case Coeff::unit: return nullptr;
            case Coeff::shared: return &c;
            case Coeff::per_l: return &c_l[tw];
        }
        return nullptr;
    }
};

struct Symbol {
    int tw_max = 0;
    double order_tag = 0;
    std::vector<SymbolTerm> terms;

    static Symbol multiplier(MultiplierFamily f, double order) {
        Symbol s{f.tw_max(), order, {}};
        SymbolTerm t;
        t.kind = SymbolTerm::Coeff::unit;
        t.m = std::move(f.blocks);
        s.terms.push_back(std::move(t));
        return s;
    }
    static Symbol identity(int tw_max) {
        return multiplier(MultiplierFamily::scalar(tw_max, [](RepLabel) { return 1.0; }), 0.0);
    }
    // c(x) * M(l)
    static Symbol field(GridFn coeff, MultiplierFamily f, double order) {
        Symbol s{f.tw_max(), order, {}};
        SymbolTerm t;
        t.kind = SymbolTerm::Coeff::shared;
        t.c = std::move(coeff);
        t.m = std::move(f.blocks);
        s.terms.push_back(std::move(t));
        return s;
    }
    static Symbol scalar_field(GridFn coeff, int tw_max, double order) {
        return field(std::move(coeff),
                     MultiplierFamily::scalar(tw_max, [](RepLabel) { return 1.0; }), order);
    }

    Symbol& operator+=(const Symbol& o) {
        for (const auto& t : o.terms) terms.push_back(t);
        order_tag = std::max(order_tag, o.order_tag);
        return *this;
    }
    friend Symbol operator+(Symbol a, const Symbol& b) { return a += b; }
    Symbol& operator*=(cplx z) {
        for (auto& t : terms)
            for (auto& blk : t.m) blk *= z;
        return *this;
    }

    // Pointwise adjoint a*(x, l).
    Symbol adjoint_pointwise() const {
        Symbol s{tw_max, order_tag, terms};
        for (auto& t : s.terms) {
            for (auto& blk : t.m) blk = blk.adjoint().eval();
            if (t.kind == SymbolTerm::Coeff::shared) t.c.values = t.c.values.conjugate();
            if (t.kind == SymbolTerm::Coeff::per_l)
                for (auto& g : t.c_l) g.values = g.values.conjugate();
        }
        return s;
    }

    // Materialize a(x_node, l) for one grid node index.
    Mat at_node(int tw, std::size_t node) const {
        Mat out = Mat::Zero(tw + 1, tw + 1);
        for (const auto& t : terms) {
            if (tw > t.tw_max()) continue;
            cplx w(1, 0);
            if (const GridFn* g = t.coeff_at(tw)) w = g->values[node];
            out += w * t.m[tw];
        }
        return out;
    }
};

// Op(a) f (x) = sum_l (2l+1) Tr(a(x,l) fhat(l) T^l(x)).
inline GridFn quantize(const Symbol& a, const SpectralFn& f, const TransformPlan& plan) {
    if (f.tw_max() > plan.l_max().twice_l)
        throw std::invalid_argument("quantize: input band exceeds the plan");
    GridFn out(plan.grid());
    int top = std::min(a.tw_max, f.tw_max());
    for (const auto& t : a.terms) {
        int ttop = std::min(top, t.tw_max());
        if (t.kind == SymbolTerm::Coeff::per_l) {
            for (int tw = 0; tw <= ttop; ++tw) {
                if (f.block(tw).isZero(0)) continue;
                SpectralFn s{RepLabel(tw)};
                s.block(tw) = t.m[tw] * f.block(tw);
                GridFn g = plan.inverse(s);
                out.values += t.c_l[tw].values.cwiseProduct(g.values);
            }
        } else {
            SpectralFn s{RepLabel(ttop)};
            for (int tw = 0; tw <= ttop; ++tw) s.block(tw) = t.m[tw] * f.block(tw);
            GridFn g = plan.inverse(s);
            if (t.kind == SymbolTerm::Coeff::shared)
                out.values += t.c.values.cwiseProduct(g.values);
            else
                out.values += g.values;
        }
    }
    return out;
}

// Symbol extraction sigma[A](x,l) = T^l(x)^* (A T^l)(x), materialized per node.
// Meant for probing operators in tests; dense storage.
struct DenseSymbol {
    const EulerGrid* grid = nullptr;
    std::vector<std::vector<Mat>> blocks;  // [tw][node]

    Mat at_node(int tw, std::size_t node) const { return blocks[tw][node]; }
};

template <class Op>
DenseSymbol symbol_of(Op&& A, const TransformPlan& plan, int tw_max) {
    const EulerGrid& g = plan.grid();
    DenseSymbol out;
    out.grid = &g;
    out.blocks.resize(tw_max + 1);
    for (int tw = 0; tw <= tw_max; ++tw) {
        RepLabel l(tw);
        int d = l.dim();
        // Apply A to every matrix-entry function T^l_{kj}.
        std::vector<GridFn> at(d * d);
        for (int k = 0; k < d; ++k)
            for (int j = 0; j < d; ++j) {
                SpectralFn e{RepLabel(tw)};
                e.block(tw)(j, k) = 1.0 / double(tw + 1);  // fhat of T_{kj}
                at[k * d + j] = A(e);
            }
        out.blocks[tw].assign(g.size(), Mat::Zero(d, d));
        std::size_t node = 0;
        for (int it = 0; it < g.n_theta(); ++it)
            for (int jp = 0; jp < g.n_phi(); ++jp)
                for (int kp = 0; kp < g.n_psi(); ++kp, ++node) {
                    Mat T = wigner_matrix(l, g.point(it, jp, kp));
                    Mat AT(d, d);
                    for (int k = 0; k < d; ++k)
                        for (int j = 0; j < d; ++j) AT(k, j) = at[k * d + j].values[node];
                    out.blocks[tw][node] = T.adjoint() * AT;
                }
    }
    return out;
}

// X_q^{(alpha)} applied to a scalar grid function, spectrally.
inline GridFn taylor_apply_grid(const TaylorOps& ops, int alpha_index, const GridFn& c,
                                const TransformPlan& plan) {
    SpectralFn ch = plan.forward(c);
    SpectralFn dc = ops.apply(alpha_index, ch);
    return plan.inverse(dc);
}

namespace detail {

// dpar^{(alpha)} = (-1)^{|alpha|} X_q^{(alpha)}: the x-derivative operators of
// the composition/adjoint expansions are dual to q^alpha(y^{-1}), and the
// working tuple satisfies q(y^{-1}) = -q(y) exactly.
inline GridFn compo_deriv(const TaylorOps& ops, int alpha_index, const GridFn& c,
                          const TransformPlan& plan) {
    GridFn g = taylor_apply_grid(ops, alpha_index, c, plan);
    if (ops.indices()[alpha_index].order() % 2 == 1) g *= cplx(-1, 0);
    return g;
}

inline std::vector<Mat> rt_diff_mats(const DiffIndex& ix, const std::vector<Mat>& m) {
    MultiplierFamily f{m};
    f = rt_difference_multi(ix, std::move(f));
    return f.blocks;
}

inline GridFn grid_product(const GridFn* a, const GridFn* b, const EulerGrid& g) {
    GridFn out(g);
    if (a && b)
        out.values = a->values.cwiseProduct(b->values);
    else if (a)
        out.values = a->values;
    else if (b)
        out.values = b->values;
    return out;
}

}  // namespace detail

// Composition expansion (a #_r b)(x,l) = sum_{|alpha|<=r} D^alpha a . dpar^{(alpha)} b.
inline Symbol compose(const Symbol& a, const Symbol& b, int r, const TaylorOps& ops,
                      const TransformPlan& plan) {
    if (r > ops.order()) throw std::invalid_argument("compose: r exceeds Taylor order");
    Symbol out{std::min(a.tw_max, b.tw_max), a.order_tag + b.order_tag, {}};
    const EulerGrid& g = plan.grid();
    for (const auto& ta : a.terms) {
        for (const auto& tb : b.terms) {
            for (std::size_t ai = 0; ai < ops.indices().size(); ++ai) {
                const DiffIndex& ix = ops.indices()[ai];
                if (ix.order() > r) continue;
                // x-part: c_a(x) * dpar^{(alpha)} c_b(x); vanishes when b is
                // x-independent and |alpha| > 0.
                if (tb.kind == SymbolTerm::Coeff::unit && ix.order() > 0) continue;
                SymbolTerm nt;
                std::vector<Mat> da = detail::rt_diff_mats(ix, ta.m);
                if (tb.kind == SymbolTerm::Coeff::per_l ||
                    ta.kind == SymbolTerm::Coeff::per_l) {
                    nt.kind = SymbolTerm::Coeff::per_l;
                    nt.c_l.resize(out.tw_max + 1);
                    for (int tw = 0; tw <= out.tw_max; ++tw) {
                        const GridFn* ca = ta.coeff_at(tw);
                        const GridFn* cb = tb.coeff_at(tw);
                        GridFn dcb;
                        if (cb) {
                            dcb = detail::compo_deriv(ops, int(ai), *cb, plan);
                            cb = &dcb;
                        } else if (ix.order() > 0) {
                            nt.c_l[tw] = GridFn(g);  // zero
                            continue;
                        }
                        nt.c_l[tw] = detail::grid_product(ca, cb, g);
                        if (!ca && !cb) nt.c_l[tw].values.setOnes();
                    }
                } else {
                    const GridFn* ca = (ta.kind == SymbolTerm::Coeff::shared) ? &ta.c : nullptr;
                    GridFn dcb;
                    const GridFn* cb = nullptr;
                    if (tb.kind == SymbolTerm::Coeff::shared) {
                        dcb = detail::compo_deriv(ops, int(ai), tb.c, plan);
                        cb = &dcb;
                    }
                    if (!ca && !cb) {
                        nt.kind = SymbolTerm::Coeff::unit;
                    } else {
                        nt.kind = SymbolTerm::Coeff::shared;
                        nt.c = detail::grid_product(ca, cb, g);
                    }
                }
                nt.m.resize(out.tw_max + 1);
                for (int tw = 0; tw <= out.tw_max; ++tw)
                    nt.m[tw] = da[tw] * tb.m[tw];
                out.terms.push_back(std::move(nt));
            }
        }
    }
    return out;
}

// Adjoint expansion a^{r;*} = sum_{|alpha|<=r} D^alpha dpar^{(alpha)} a^*.
inline Symbol adjoint_symbol(const Symbol& a, int r, const TaylorOps& ops,
                             const TransformPlan& plan) {
    if (r > ops.order()) throw std::invalid_argument("adjoint_symbol: r exceeds Taylor order");
    Symbol astar = a.adjoint_pointwise();
    Symbol out{a.tw_max, a.order_tag, {}};
    for (const auto& t : astar.terms) {
        for (std::size_t ai = 0; ai < ops.indices().size(); ++ai) {
            const DiffIndex& ix = ops.indices()[ai];
            if (ix.order() > r) continue;
            if (t.kind == SymbolTerm::Coeff::unit && ix.order() > 0) continue;
            SymbolTerm nt;
            nt.m = detail::rt_diff_mats(ix, t.m);
            if (t.kind == SymbolTerm::Coeff::unit) {
                nt.kind = SymbolTerm::Coeff::unit;
            } else if (t.kind == SymbolTerm::Coeff::shared) {
                nt.kind = SymbolTerm::Coeff::shared;
                nt.c = detail::compo_deriv(ops, int(ai), t.c, plan);
            } else {
                nt.kind = SymbolTerm::Coeff::per_l;
                nt.c_l.reserve(t.c_l.size());
                for (const auto& g : t.c_l)
                    nt.c_l.push_back(detail::compo_deriv(ops, int(ai), g, plan));
            }
            out.terms.push_back(std::move(nt));
        }
    }
    return out;
}

// Norm sup_{x,l} <l>^{|beta| - m - |alpha|} || Pi^alpha_x D^beta_q a || over
// |alpha| <= k, |beta| <= j; operator norm on each block.
inline double symbol_norm(const Symbol& a, int k, int j, double m, const TaylorOps& ops,
                          const TransformPlan& plan) {
    double sup = 0;
    auto indices = multi_indices_up_to(std::max(k, j));
    for (const auto& alpha : indices) {
        if (alpha.order() > k) continue;
        for (const auto& beta : indices) {
            if (beta.order() > j) continue;
            // Derived symbol: word Pi^alpha on coefficients, D^beta on blocks.
            Symbol d{a.tw_max, a.order_tag, {}};
            for (const auto& t : a.terms) {
                SymbolTerm nt;
                nt.m = detail::rt_diff_mats(beta, t.m);
                nt.kind = t.kind;
                auto word_apply = [&](const GridFn& c) {
                    SpectralFn ch = plan.forward(c);
                    SpectralFn dc = apply_multiplier(
                        ch, [&](RepLabel l) { return TaylorOps::word(alpha, l); });
                    return plan.inverse(dc);
                };
                if (t.kind == SymbolTerm::Coeff::shared) {
                    if (alpha.order() > 0) nt.c = word_apply(t.c);
                    else nt.c = t.c;
                } else if (t.kind == SymbolTerm::Coeff::per_l) {
                    for (const auto& g : t.c_l)
                        nt.c_l.push_back(alpha.order() > 0 ? word_apply(g) : g);
                } else if (alpha.order() > 0) {
                    continue;  // derivative of a constant coefficient: term vanishes
                }
                d.terms.push_back(std::move(nt));
            }
            // Each RT difference eats half a degree at the top; blocks within
            // |beta| of tw_max are truncation artifacts and are excluded.
            for (int tw = 0; tw <= a.tw_max - beta.order(); ++tw) {
                RepLabel l(tw);
                double wgt = std::pow(l.bracket(), beta.order() - m - alpha.order());
                bool any_x = false;
                for (const auto& t : d.terms)
                    if (t.kind != SymbolTerm::Coeff::unit) any_x = true;
                std::size_t n_nodes = any_x ? plan.grid().size() : 1;
                for (std::size_t node = 0; node < n_nodes; ++node) {
                    Mat blk = d.at_node(tw, node);
                    if (blk.size() == 0 || blk.isZero(0)) continue;
                    double opn = blk.jacobiSvd().singularValues()(0);
                    sup = std::max(sup, wgt * opn);
                }
            }
        }
    }
    return sup;
}

inline cplx inner_product(const GridFn& u, const GridFn& v) {
    const EulerGrid& g = *u.grid;
    cplx s = 0;
    for (int i = 0; i < g.n_theta(); ++i)
        for (int j = 0; j < g.n_phi(); ++j)
            for (int k = 0; k < g.n_psi(); ++k)
                s += g.weight(i) * u.at(i, j, k) * std::conj(v.at(i, j, k));
    return s;
}

}  // namespace paragroup
