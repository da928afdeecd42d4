#pragma once

#include <Eigen/Dense>
#include <cassert>
#include <cmath>
#include <stdexcept>

#include "paragroup/euler.hpp"
#include "paragroup/half_integer.hpp"

namespace paragroup {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

namespace detail {

// Jacobi polynomial P_k^{(a,b)}(z) by the three-term recurrence; a, b >= 0.
inline double jacobi_poly(int k, int a, int b, double z) {
    if (k == 0) return 1.0;
    double p0 = 1.0;
    double p1 = 0.5 * (a - b + (a + b + 2) * z);
    for (int n = 2; n <= k; ++n) {
        double n2ab = 2.0 * n + a + b;
        double c1 = 2.0 * n * (n + a + b) * (n2ab - 2.0);
        double c2 = (n2ab - 1.0) * (n2ab * (n2ab - 2.0) * z + double(a) * a - double(b) * b);
        double c3 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * n2ab;
        double p2 = (c2 * p1 - c3 * p0) / c1;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

inline double sqrt_factorial_ratio(int a_num, int b_num, int c_den, int d_den) {
    // sqrt(a! b! / (c! d!)) via lgamma.
    double lg = 0.5 * (std::lgamma(a_num + 1.0) + std::lgamma(b_num + 1.0) -
                       std::lgamma(c_den + 1.0) - std::lgamma(d_den + 1.0));
    return std::exp(lg);
}

inline cplx i_pow(int k) {
    switch (((k % 4) + 4) % 4) {
        case 0: return {1, 0};
        case 1: return {0, 1};
        case 2: return {-1, 0};
        default: return {0, -1};
    }
}

}  // namespace detail

// P^l_{nm}(cos theta) with the Euler-angle convention
// T^l_{nm}(Omega(phi,theta,psi)) = e^{-i(n phi + m psi)} P^l_{nm}(cos theta).
// Indices given doubled (2n, 2m). Evaluated through Jacobi polynomials after
// reducing (n,m) with the exact symmetries P_{nm} = P_{mn} = P_{-n,-m}; this
// stays stable far beyond the factorial form of the raw derivative formula.
inline cplx wigner_p(RepLabel l, int tn, int tm, double theta) {
    assert(std::abs(tn) <= l.twice_l && std::abs(tm) <= l.twice_l);
    assert((tn - l.twice_l) % 2 == 0 && (tm - l.twice_l) % 2 == 0);
    // Reduce with P_{nm} = P_{mn} = P_{-n,-m} so that a >= |b| (doubled units).
    int a = tn, b = tm;
    if (std::abs(a) < std::abs(b)) std::swap(a, b);
    if (a < 0) { a = -a; b = -b; }
    int tw = l.twice_l;
    int k = (tw - a) / 2;        // degree of the Jacobi polynomial
    int ja = (a - b) / 2;        // Jacobi parameter n-m
    int jb = (a + b) / 2;        // Jacobi parameter n+m
    double c = std::cos(0.5 * theta), s = std::sin(0.5 * theta);
    double poly = detail::jacobi_poly(k, ja, jb, std::cos(theta));
    double amp = detail::sqrt_factorial_ratio((tw + a) / 2, (tw - a) / 2, (tw - b) / 2, (tw + b) / 2);
    double sc = std::pow(s, ja) * std::pow(c, jb);
    int par = (2 * tw - a - b) / 2;  // exponent 2l - n - m (integer)
    double sgn = (par % 2 == 0) ? 1.0 : -1.0;
    return sgn * detail::i_pow((b - a) / 2) * amp * sc * poly;
}

inline cplx wigner_entry(RepLabel l, int tn, int tm, const EulerPoint& x) {
    if (std::abs(tn) > l.twice_l || std::abs(tm) > l.twice_l)
        throw std::out_of_range("wigner_entry: index out of range");
    if ((tn - l.twice_l) % 2 != 0 || (tm - l.twice_l) % 2 != 0)
        throw std::invalid_argument("wigner_entry: index parity does not match label");
    cplx p = wigner_p(l, tn, tm, x.theta);
    return std::polar(1.0, -0.5 * (tn * x.phi + tm * x.psi)) * p;
}

// Full matrix T^l(x); rows indexed by n, columns by m (both ascending).
inline Mat wigner_matrix(RepLabel l, const EulerPoint& x) {
    int d = l.dim();
    Mat T(d, d);
    for (int i = 0; i < d; ++i) {
        int tn = l.twice_m_at(i);
        for (int j = 0; j < d; ++j) T(i, j) = wigner_entry(l, tn, l.twice_m_at(j), x);
    }
    return T;
}

enum class PiTag { plus, minus, zero };

// Symbols of the left-invariant operators Pi_+, Pi_-, Pi_0 (Fourier
// multipliers). Matrix layout matches the blocks of the Fourier transform:
// sigma_+ carries -sqrt((l-k)(l+k+1)) at (row k+1, col k), sigma_- its
// transpose pattern, sigma_0 = diag(k).
inline Mat sigma(PiTag tag, RepLabel l) {
    int d = l.dim();
    Mat m = Mat::Zero(d, d);
    int tw = l.twice_l;
    switch (tag) {
        case PiTag::plus:
            for (int tk = -tw; tk <= tw - 2; tk += 2)
                m(l.index_of(tk + 2), l.index_of(tk)) =
                    -0.5 * std::sqrt(double(tw - tk) * double(tw + tk + 2));
            break;
        case PiTag::minus:
            for (int tk = -tw + 2; tk <= tw; tk += 2)
                m(l.index_of(tk - 2), l.index_of(tk)) =
                    -0.5 * std::sqrt(double(tw + tk) * double(tw - tk + 2));
            break;
        case PiTag::zero:
            for (int tk = -tw; tk <= tw; tk += 2) m(l.index_of(tk), l.index_of(tk)) = 0.5 * tk;
            break;
    }
    return m;
}

// Symbols of the orthonormal left-invariant fields X_1, X_2, X_3
// (Pi_+ = iX_1 - X_2, Pi_- = iX_1 + X_2, Pi_0 = iX_3). Skew-Hermitian.
inline Mat sigma_x(int j, RepLabel l) {
    cplx mi(0, -1);
    switch (j) {
        case 1: return 0.5 * mi * (sigma(PiTag::plus, l) + sigma(PiTag::minus, l));
        case 2: return 0.5 * (sigma(PiTag::minus, l) - sigma(PiTag::plus, l));
        case 3: return mi * sigma(PiTag::zero, l);
        default: throw std::invalid_argument("sigma_x: j must be 1, 2 or 3");
    }
}

}  // namespace paragroup
