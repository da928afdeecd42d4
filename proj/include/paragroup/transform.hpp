#pragma once

#include <memory>
#include <stdexcept>
#include <vector>

#include "paragroup/parallel.hpp"
#include "paragroup/spectral.hpp"

namespace paragroup {

// Forward/inverse Peter-Weyl transform on an EulerGrid, with the Wigner
// function tables P^l_{nm}(z_i) and the phi/psi phase tables precomputed.
class TransformPlan {
  public:
    TransformPlan(const EulerGrid& grid, RepLabel l_max) : grid_(&grid), l_max_(l_max) {
        if (grid.exact_product_degree() < 2 * l_max.twice_l)
            throw std::invalid_argument(
                "TransformPlan: grid too coarse for requested l_max (needs product exactness "
                "degree >= 2*l_max)");
        int L = l_max.twice_l;
        ptab_.resize(L + 1);
        for (int tw = 0; tw <= L; ++tw) {
            RepLabel l(tw);
            ptab_[tw].assign(grid.n_theta(), Mat(l.dim(), l.dim()));
        }
        parallel_for(grid.n_theta(), [&](std::size_t i) {
            for (int tw = 0; tw <= L; ++tw) {
                RepLabel l(tw);
                for (int a = 0; a < l.dim(); ++a)
                    for (int b = 0; b < l.dim(); ++b)
                        ptab_[tw][i](a, b) =
                            wigner_p(l, l.twice_m_at(a), l.twice_m_at(b), grid.theta(int(i)));
            }
        });
        ephi_.resize(grid.n_phi(), std::vector<cplx>(2 * L + 1));
        for (int j = 0; j < grid.n_phi(); ++j)
            for (int t = -L; t <= L; ++t)
                ephi_[j][t + L] = std::polar(1.0, 0.5 * t * grid.phi(j));
        epsi_.resize(grid.n_psi(), std::vector<cplx>(2 * L + 1));
        for (int k = 0; k < grid.n_psi(); ++k)
            for (int t = -L; t <= L; ++t)
                epsi_[k][t + L] = std::polar(1.0, 0.5 * t * grid.psi(k));
    }

    const EulerGrid& grid() const { return *grid_; }
    RepLabel l_max() const { return l_max_; }

    // \hat f(l)_{mn} = sum_x w(x) f(x) conj(T^l_{nm}(x)), separated over the
    // product structure of the grid.
    SpectralFn forward(const GridFn& f) const {
        check_grid(f);
        int L = l_max_.twice_l;
        int nt = grid_->n_theta(), np = grid_->n_phi(), ns = grid_->n_psi();
        int F = 2 * L + 1;
        // stage A: phi sums; stage B: psi sums -> B[i](tn, tm)
        std::vector<Mat> Bt(nt, Mat::Zero(F, F));
        parallel_for(nt, [&](std::size_t ii) {
            int i = int(ii);
            Mat A = Mat::Zero(F, ns);
            for (int j = 0; j < np; ++j) {
                const auto& ph = ephi_[j];
                for (int k = 0; k < ns; ++k) {
                    cplx v = f.at(i, j, k);
                    if (v == cplx(0, 0)) continue;
                    for (int t = 0; t < F; ++t) A(t, k) += ph[t] * v;
                }
            }
            A /= double(np);
            for (int k = 0; k < ns; ++k) {
                const auto& ps = epsi_[k];
                for (int tn = 0; tn < F; ++tn) {
                    cplx a = A(tn, k);
                    if (a == cplx(0, 0)) continue;
                    for (int tm = 0; tm < F; ++tm) Bt[i](tn, tm) += a * ps[tm];
                }
            }
            Bt[i] /= double(ns);
        });
        SpectralFn out(l_max_);
        for (int tw = 0; tw <= L; ++tw) {
            RepLabel l(tw);
            Mat& blk = out.block(tw);
            for (int i = 0; i < nt; ++i) {
                double w = grid_->wz(i);
                const Mat& P = ptab_[tw][i];
                for (int a = 0; a < l.dim(); ++a) {      // a: n index
                    int tn = l.twice_m_at(a);
                    for (int b = 0; b < l.dim(); ++b) {  // b: m index
                        int tm = l.twice_m_at(b);
                        blk(b, a) += w * std::conj(P(a, b)) * Bt[i](tn + L, tm + L);
                    }
                }
            }
        }
        return out;
    }

    // g(x) = sum_l (2l+1) Tr(a(l) T^l(x)).
    GridFn inverse(const SpectralFn& a) const {
        int L = std::min(a.tw_max(), l_max_.twice_l);
        int nt = grid_->n_theta(), np = grid_->n_phi(), ns = grid_->n_psi();
        int F = 2 * l_max_.twice_l + 1, off = l_max_.twice_l;
        GridFn g(*grid_);
        parallel_for(nt, [&](std::size_t ii) {
            int i = int(ii);
            Mat H = Mat::Zero(F, F);  // (tn, tm) -> sum_l (2l+1) a(l)_{mn} P^l_{nm}(z_i)
            for (int tw = 0; tw <= L; ++tw) {
                RepLabel l(tw);
                const Mat& P = ptab_[tw][i];
                const Mat& blk = a.block(tw);
                if (blk.isZero(0)) continue;
                for (int ai = 0; ai < l.dim(); ++ai) {
                    int tn = l.twice_m_at(ai);
                    for (int b = 0; b < l.dim(); ++b) {
                        int tm = l.twice_m_at(b);
                        H(tn + off, tm + off) += double(tw + 1) * blk(b, ai) * P(ai, b);
                    }
                }
            }
            Mat C = Mat::Zero(F, ns);  // contract psi: C(tn, k) = sum_tm H(tn,tm) e^{-i m psi_k}
            for (int k = 0; k < ns; ++k) {
                const auto& ps = epsi_[k];
                for (int tn = 0; tn < F; ++tn) {
                    cplx s = 0;
                    for (int tm = 0; tm < F; ++tm) s += H(tn, tm) * std::conj(ps[tm]);
                    C(tn, k) = s;
                }
            }
            for (int j = 0; j < np; ++j) {
                const auto& ph = ephi_[j];
                for (int k = 0; k < ns; ++k) {
                    cplx s = 0;
                    for (int tn = 0; tn < F; ++tn) s += C(tn, k) * std::conj(ph[tn]);
                    g.at(i, j, k) = s;
                }
            }
        });
        return g;
    }

    const Mat& p_table(int tw, int i_theta) const { return ptab_[tw][i_theta]; }

  private:
    void check_grid(const GridFn& f) const {
        if (f.grid != grid_ && !(*f.grid == *grid_))
            throw std::invalid_argument("TransformPlan: grid mismatch");
    }

    const EulerGrid* grid_;
    RepLabel l_max_;
    std::vector<std::vector<Mat>> ptab_;
    std::vector<std::vector<cplx>> ephi_, epsi_;
};

inline double sobolev_norm(const SpectralFn& a, double s) { return a.sobolev_norm(s); }

// Blockwise left multiplication by a Fourier multiplier family m(l).
template <class M>
SpectralFn apply_multiplier(const SpectralFn& f, M&& m) {
    SpectralFn out(f.l_max());
    for (int tw = 0; tw <= f.tw_max(); ++tw) out.block(tw) = m(RepLabel(tw)) * f.block(tw);
    return out;
}

// Right convolution f*g computed spectrally: widehat{f*g} = ghat * fhat.
inline SpectralFn convolve(const SpectralFn& f, const SpectralFn& g) {
    SpectralFn out(f.l_max());
    for (int tw = 0; tw <= std::min(f.tw_max(), g.tw_max()); ++tw)
        out.block(tw) = g.block(tw) * f.block(tw);
    return out;
}

}  // namespace paragroup
