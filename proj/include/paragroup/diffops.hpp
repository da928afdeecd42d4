#pragma once

#include <array>
#include <functional>
#include <vector>

#include "paragroup/sphere.hpp"
#include "paragroup/transform.hpp"

namespace paragroup {

// Left-invariant field applied spectrally: (Pi f)^ (l) = sigma(l) \hat f(l).
inline SpectralFn apply_pi(PiTag tag, const SpectralFn& f) {
    return apply_multiplier(f, [&](RepLabel l) { return sigma(tag, l); });
}
inline SphCoeff apply_pi(PiTag tag, const SphCoeff& v) {
    SphCoeff out(v.l_max());
    for (int l = 0; l <= v.l_max(); ++l)
        out.block(l) = sigma(tag, RepLabel::integer(l)) * v.block(l);
    return out;
}

// RT difference operators for the working tuple (q_+, q_-, q_0), acting on a
// family of blocks indexed by tw = 2l. The accessor returns nullptr outside
// the stored range; missing neighbours are read as zero, which truncates the
// result at the top degree.
using BlockAccess = std::function<const Mat*(int tw)>;

inline Mat rt_diff_block(PiTag tag, int tw, const BlockAccess& a) {
    RepLabel l(tw);
    int d = l.dim();
    Mat out = Mat::Zero(d, d);
    const Mat* lo = (tw >= 1) ? a(tw - 1) : nullptr;
    const Mat* hi = a(tw + 1);
    auto get = [](const Mat* b, int tw_b, int tn, int tm) -> cplx {
        if (!b || std::abs(tn) > tw_b || std::abs(tm) > tw_b) return {0, 0};
        RepLabel lb(tw_b);
        return (*b)(lb.index_of(tn), lb.index_of(tm));
    };
    double inv = 1.0 / (tw + 1);
    for (int tn = -tw; tn <= tw; tn += 2)
        for (int tm = -tw; tm <= tw; tm += 2) {
            cplx v(0, 0);
            switch (tag) {
                case PiTag::plus:
                    v = 0.5 * std::sqrt(double(tw + tm) * double(tw - tn)) *
                            get(lo, tw - 1, tn + 1, tm - 1) -
                        0.5 * std::sqrt(double(tw - tm + 2) * double(tw + tn + 2)) *
                            get(hi, tw + 1, tn + 1, tm - 1);
                    break;
                case PiTag::minus:
                    v = 0.5 * std::sqrt(double(tw - tm) * double(tw + tn)) *
                            get(lo, tw - 1, tn - 1, tm + 1) -
                        0.5 * std::sqrt(double(tw + tm + 2) * double(tw - tn + 2)) *
                            get(hi, tw + 1, tn - 1, tm + 1);
                    break;
                case PiTag::zero:
                    // Third coefficient carries a minus sign; fixed against
                    // the definitional identity (D_q fhat) = (q f)^.
                    v = 0.5 * std::sqrt(double(tw - tm) * double(tw - tn)) *
                            get(lo, tw - 1, tn + 1, tm + 1) +
                        0.5 * std::sqrt(double(tw + tm + 2) * double(tw + tn + 2)) *
                            get(hi, tw + 1, tn + 1, tm + 1) -
                        0.5 * std::sqrt(double(tw + tm) * double(tw + tn)) *
                            get(lo, tw - 1, tn - 1, tm - 1) -
                        0.5 * std::sqrt(double(tw - tm + 2) * double(tw - tn + 2)) *
                            get(hi, tw + 1, tn - 1, tm - 1);
                    break;
            }
            out(l.index_of(tn), l.index_of(tm)) = v * inv;
        }
    return out;
}

struct RtDiffResult {
    SpectralFn fn;
    bool truncated_top = false;  // top-degree stencil read a missing block
};

inline RtDiffResult rt_difference(PiTag tag, const SpectralFn& f) {
    RtDiffResult r{SpectralFn(f.l_max()), false};
    BlockAccess acc = [&](int tw) -> const Mat* {
        return (tw >= 0 && tw <= f.tw_max()) ? &f.block(tw) : nullptr;
    };
    for (int tw = 0; tw <= f.tw_max(); ++tw) r.fn.block(tw) = rt_diff_block(tag, tw, acc);
    if (f.tw_max() >= 0 && !f.block(f.tw_max()).isZero(0)) r.truncated_top = true;
    return r;
}

// Multiplier family (one matrix per tw), e.g. a Fourier-multiplier symbol.
struct MultiplierFamily {
    std::vector<Mat> blocks;  // blocks[tw], tw = 0..tw_max

    int tw_max() const { return int(blocks.size()) - 1; }
    static MultiplierFamily sigma_family(PiTag tag, int tw_max) {
        MultiplierFamily m;
        m.blocks.reserve(tw_max + 1);
        for (int tw = 0; tw <= tw_max; ++tw) m.blocks.push_back(sigma(tag, RepLabel(tw)));
        return m;
    }
    template <class H>
    static MultiplierFamily scalar(int tw_max, H&& h) {
        MultiplierFamily m;
        for (int tw = 0; tw <= tw_max; ++tw)
            m.blocks.push_back(cplx(h(RepLabel(tw))) * Mat::Identity(tw + 1, tw + 1));
        return m;
    }
};

inline MultiplierFamily rt_difference(PiTag tag, const MultiplierFamily& m) {
    MultiplierFamily out;
    BlockAccess acc = [&](int tw) -> const Mat* {
        return (tw >= 0 && tw <= m.tw_max()) ? &m.blocks[tw] : nullptr;
    };
    out.blocks.reserve(m.blocks.size());
    for (int tw = 0; tw <= m.tw_max(); ++tw) out.blocks.push_back(rt_diff_block(tag, tw, acc));
    return out;
}

// Multi-index over (plus, minus, zero) powers.
struct DiffIndex {
    std::array<int, 3> alpha{0, 0, 0};
    int order() const { return alpha[0] + alpha[1] + alpha[2]; }
    bool operator==(const DiffIndex& o) const { return alpha == o.alpha; }
};

inline std::vector<DiffIndex> multi_indices_up_to(int order) {
    std::vector<DiffIndex> out;
    for (int total = 0; total <= order; ++total)
        for (int a = total; a >= 0; --a)
            for (int b = total - a; b >= 0; --b) out.push_back({{a, b, total - a - b}});
    return out;
}

// q^alpha as a grid function (q_+^a1 q_-^a2 q_0^a3).
inline cplx q_power(const DiffIndex& ix, const Su2& x) {
    cplx v(1, 0);
    for (int i = 0; i < ix.alpha[0]; ++i) v *= q_plus(x);
    for (int i = 0; i < ix.alpha[1]; ++i) v *= q_minus(x);
    for (int i = 0; i < ix.alpha[2]; ++i) v *= q_zero(x);
    return v;
}

// Composite RT difference D^alpha (the q's multiply, so the order of the
// factors is immaterial).
template <class T>
T rt_difference_multi(const DiffIndex& ix, T m) {
    for (int i = 0; i < ix.alpha[0]; ++i) m = rt_difference(PiTag::plus, m);
    for (int i = 0; i < ix.alpha[1]; ++i) m = rt_difference(PiTag::minus, m);
    for (int i = 0; i < ix.alpha[2]; ++i) m = rt_difference(PiTag::zero, m);
    return m;
}
inline SpectralFn rt_difference_multi_fn(const DiffIndex& ix, SpectralFn f) {
    for (int i = 0; i < ix.alpha[0]; ++i) f = rt_difference(PiTag::plus, f).fn;
    for (int i = 0; i < ix.alpha[1]; ++i) f = rt_difference(PiTag::minus, f).fn;
    for (int i = 0; i < ix.alpha[2]; ++i) f = rt_difference(PiTag::zero, f).fn;
    return f;
}

// Taylor-expansion operators X_q^{(alpha)} up to a given order, expressed as
// noncommutative polynomials in Pi_+, Pi_-, Pi_0 (normal ordering). The
// coefficients solve the moment system X_q^{(alpha)} q^beta (e) = delta.
class TaylorOps {
  public:
    explicit TaylorOps(int order = 2) : order_(order), idx_(multi_indices_up_to(order)) {
        if (order > 2) throw std::invalid_argument("TaylorOps: order capped at 2");
        build();
    }

    int order() const { return order_; }
    const std::vector<DiffIndex>& indices() const { return idx_; }
    const Eigen::MatrixXcd& coefficients() const { return coeff_; }
    double moment_residual() const { return moment_residual_; }

    // Multiplier of the normal-ordered word Pi_+^{g1} Pi_-^{g2} Pi_0^{g3}:
    // sigma_+^{g1} sigma_-^{g2} sigma_0^{g3} (rightmost factor acts first).
    static Mat word(const DiffIndex& g, RepLabel l) {
        Mat w = Mat::Identity(l.dim(), l.dim());
        for (int i = 0; i < g.alpha[2]; ++i) w = sigma(PiTag::zero, l) * w;
        for (int i = 0; i < g.alpha[1]; ++i) w = sigma(PiTag::minus, l) * w;
        for (int i = 0; i < g.alpha[0]; ++i) w = sigma(PiTag::plus, l) * w;
        return w;
    }

    // Multiplier of X_q^{(alpha)} at label l.
    Mat multiplier(int alpha_index, RepLabel l) const {
        Mat m = Mat::Zero(l.dim(), l.dim());
        for (std::size_t g = 0; g < idx_.size(); ++g) {
            if (coeff_(alpha_index, Eigen::Index(g)) == cplx(0, 0)) continue;
            m += coeff_(alpha_index, Eigen::Index(g)) * word(idx_[g], l);
        }
        return m;
    }

    SpectralFn apply(int alpha_index, const SpectralFn& f) const {
        return apply_multiplier(f, [&](RepLabel l) { return multiplier(alpha_index, l); });
    }
    SphCoeff apply(int alpha_index, const SphCoeff& v) const {
        SphCoeff out(v.l_max());
        for (int l = 0; l <= v.l_max(); ++l)
            out.block(l) = multiplier(alpha_index, RepLabel::integer(l)) * v.block(l);
        return out;
    }

  private:
    void build() {
        const int n = int(idx_.size());
        // Moments (Pi^gamma q^beta)(e) computed spectrally: the q's are
        // matrix entries of the fundamental representation, so q^beta is
        // band-limited to l <= |beta|/2 and the evaluation is exact.
        EulerGrid g = EulerGrid::for_band(4 * order_ + 4);
        TransformPlan plan(g, RepLabel(2 * order_));
        Eigen::MatrixXcd M(n, n);
        for (int b = 0; b < n; ++b) {
            GridFn qb = sample(g, [&](const EulerPoint& p) {
                return q_power(idx_[b], su2_from_euler(p));
            });
            SpectralFn qhat = plan.forward(qb);
            for (int gma = 0; gma < n; ++gma) {
                cplx at_e = 0;
                for (int tw = 0; tw <= qhat.tw_max(); ++tw)
                    at_e += double(tw + 1) *
                            (word(idx_[gma], RepLabel(tw)) * qhat.block(tw)).trace();
                M(gma, b) = at_e;
            }
        }
        Eigen::FullPivLU<Eigen::MatrixXcd> lu(M);
        if (!lu.isInvertible())
            throw std::runtime_error("TaylorOps: moment system singular");
        coeff_ = lu.inverse();
        moment_residual_ = (coeff_ * M - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    }

    int order_;
    std::vector<DiffIndex> idx_;
    Eigen::MatrixXcd coeff_;  // row alpha, column gamma
    double moment_residual_ = 0;
};

}  // namespace paragroup
