#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace paragroup {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;

// Euler angles (phi, theta, psi) of x = omega3(phi) omega1(theta) omega3(psi),
// phi in [0,2pi), theta in [0,pi], psi in [-2pi,2pi). theta in {0,pi} is a
// coordinate singularity of the chart, not of the group.
struct EulerPoint {
    double phi = 0, theta = 0, psi = 0;
    bool coordinate_singular() const { return theta <= 0.0 || theta >= pi; }
};

// x = [[x1, x2], [-conj(x2), conj(x1)]], |x1|^2 + |x2|^2 = 1.
struct Su2 {
    cplx x1{1.0, 0.0}, x2{0.0, 0.0};

    static Su2 identity() { return {}; }
    Su2 operator*(const Su2& o) const {
        // 2x2 matrix product preserving the (x1, x2) parameterization.
        return {x1 * o.x1 - x2 * std::conj(o.x2), x1 * o.x2 + x2 * std::conj(o.x1)};
    }
    Su2 inverse() const { return {std::conj(x1), -x2}; }
    // Geodesic distance to Id under G0 (four times the round 3-sphere metric,
    // so lengths are doubled): 2 * arccos(Re x1).
    double dist_to_identity() const {
        double c = std::clamp(x1.real(), -1.0, 1.0);
        return 2.0 * std::acos(c);
    }
};

inline Su2 su2_from_euler(const EulerPoint& e) {
    double c = std::cos(0.5 * e.theta), s = std::sin(0.5 * e.theta);
    cplx ei_sum = std::polar(1.0, 0.5 * (e.phi + e.psi));
    cplx ei_dif = std::polar(1.0, 0.5 * (e.phi - e.psi));
    return {ei_sum * c, cplx(0, 1) * ei_dif * s};
}

// Inverts su2_from_euler; the (phi, psi) pair is normalized into the chart's
// fundamental domain (phi in [0,2pi), psi in [-2pi,2pi)).
inline EulerPoint euler_from_su2(const Su2& x) {
    double a1 = std::abs(x.x1), a2 = std::abs(x.x2);
    EulerPoint e;
    e.theta = 2.0 * std::atan2(a2, a1);
    double alpha = (a1 > 1e-300) ? 2.0 * std::arg(x.x1) : 0.0;
    double beta = (a2 > 1e-300) ? 2.0 * std::arg(x.x2 / cplx(0, 1)) : 0.0;
    e.phi = 0.5 * (alpha + beta);
    e.psi = 0.5 * (alpha - beta);
    while (e.phi < 0) { e.phi += 2 * pi; e.psi -= 2 * pi; }
    while (e.phi >= 2 * pi) { e.phi -= 2 * pi; e.psi += 2 * pi; }
    while (e.psi < -2 * pi) e.psi += 4 * pi;
    while (e.psi >= 2 * pi) e.psi -= 4 * pi;
    return e;
}

inline EulerPoint euler_product(const EulerPoint& a, const EulerPoint& b) {
    return euler_from_su2(su2_from_euler(a) * su2_from_euler(b));
}

// Hopf projection SU(2) -> S^2; independent of phi.
inline std::array<double, 3> hopf_project(const EulerPoint& e) {
    double st = std::sin(e.theta);
    return {st * std::cos(e.psi), st * std::sin(e.psi), std::cos(e.theta)};
}

// RT-admissible working tuple (q_+, q_-, q_0) = (-conj(x2), x2, x1 - conj(x1)).
inline cplx q_plus(const Su2& x) { return -std::conj(x.x2); }
inline cplx q_minus(const Su2& x) { return x.x2; }
inline cplx q_zero(const Su2& x) { return x.x1 - std::conj(x.x1); }

}  // namespace paragroup
