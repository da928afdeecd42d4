#pragma once

#include <cmath>
#include <vector>

#include "paragroup/sphere.hpp"
#include "paragroup/transform.hpp"

namespace paragroup {

// Smooth cutoff phi with phi = 1 on [-1/2, 1/2], phi = 0 off (-1, 1), glued
// with e^{-1/x}; psi(t) = -t phi'(t); theta(t) = phi(t/2) - phi(t). The
// constants are fixed by this formula, so every cutoff-dependent result is
// reproducible bit for bit.
struct CutoffFamily {
    static double glue(double x) { return x > 0 ? std::exp(-1.0 / x) : 0.0; }
    static double step(double x) {
        // 0 for x <= 0, 1 for x >= 1, smooth monotone in between.
        double a = glue(x), b = glue(1.0 - x);
        return a / (a + b);
    }
    static double phi(double t) {
        double a = std::abs(t);
        if (a <= 0.5) return 1.0;
        if (a >= 1.0) return 0.0;
        return 1.0 - step(2.0 * a - 1.0);
    }
    static double step_deriv(double x) {
        if (x <= 0.0 || x >= 1.0) return 0.0;
        double a = glue(x), b = glue(1.0 - x);
        return (a * b / (x * x) + a * b / ((1.0 - x) * (1.0 - x))) / ((a + b) * (a + b));
    }
    static double psi(double t) {
        // -t phi'(t); supported on 1/2 <= |t| <= 1, nonnegative.
        double a = std::abs(t);
        if (a <= 0.5 || a >= 1.0) return 0.0;
        return 2.0 * a * step_deriv(2.0 * a - 1.0);
    }
    static double theta(double t) { return phi(0.5 * t) - phi(t); }
};

// Geometric ladder t_k = 2^{k/K}, with the exact telescoping filters
// B_k(t) = phi(t/t_{k+1}) - phi(t/t_k). Together with the low filter
// phi(t/t_0), the B_k sum to phi(t/t_top): the discrete partition of unity is
// exact, which the para-product and Bony constructions rely on.
struct TLadder {
    int per_octave = 32;
    std::vector<double> t;  // t[0] = 1 <= ... <= t.back() = t_top

    TLadder(double t_top, int k_per_octave = 32) : per_octave(k_per_octave) {
        int n = int(std::ceil(std::log2(std::max(2.0, t_top)) * per_octave)) + 1;
        t.reserve(n + 1);
        for (int k = 0; k <= n; ++k) t.push_back(std::pow(2.0, double(k) / per_octave));
    }
    int blocks() const { return int(t.size()) - 1; }
    double t_mid(int k) const { return std::sqrt(t[k] * t[k + 1]); }
    double block_filter(int k, double lam) const {
        return CutoffFamily::phi(lam / t[k + 1]) - CutoffFamily::phi(lam / t[k]);
    }
    double low_filter(double lam) const { return CutoffFamily::phi(lam); }
};

// Discrete dyadic block: scales block l by theta(|xi|/2^j), |xi| = sqrt(l(l+1)).
template <class F>
F dyadic_block(const F& f, int j) {
    double scale = std::pow(2.0, double(j));
    return f.scaled([&](RepLabel l) { return CutoffFamily::theta(l.freq() / scale); });
}

// Partial sum operator phi(|nabla|/T); T >= 1.
template <class F>
F partial_sum(const F& f, double T) {
    if (T < 1.0) throw std::invalid_argument("partial_sum: T must be >= 1");
    return f.scaled([&](RepLabel l) { return CutoffFamily::phi(l.freq() / T); });
}

template <class F>
F psi_filter(const F& f, double t) {
    return f.scaled([&](RepLabel l) { return CutoffFamily::psi(l.freq() / t); });
}
template <class F>
F low_filter(const F& f) {
    return f.scaled([](RepLabel l) { return CutoffFamily::phi(l.freq()); });
}
template <class F>
F ladder_block(const F& f, const TLadder& lad, int k) {
    return f.scaled([&](RepLabel l) { return lad.block_filter(k, l.freq()); });
}

// Spectral Zygmund-norm estimator:
// sup_{t >= 1 sampled} t^r |psi_t(|nabla|) f|_{L^inf,grid} + |phi(|nabla|) f|_{L^inf,grid}.
inline double zygmund_estimate(const SpectralFn& f, double r, const TransformPlan& plan,
                               int samples_per_octave = 4) {
    if (r <= 0) throw std::invalid_argument("zygmund_estimate: r must be positive");
    double low = plan.inverse(low_filter(f)).max_abs();
    double top = 2.0 * RepLabel(f.tw_max()).freq() + 2.0;
    double sup = 0.0;
    for (double t = 1.0; t <= top; t *= std::pow(2.0, 1.0 / samples_per_octave)) {
        double val = plan.inverse(psi_filter(f, t)).max_abs();
        sup = std::max(sup, std::pow(t, r) * val);
    }
    return sup + low;
}

}  // namespace paragroup
