#pragma once

#include <cassert>
#include <cmath>
#include <compare>
#include <cstdint>
#include <string>

namespace paragroup {

// Representation label l of an SU(2) irreducible. Stored as 2l so that
// half-integers stay exact and usable as array indices.
struct RepLabel {
    int twice_l = 0;

    constexpr RepLabel() = default;
    constexpr explicit RepLabel(int twice) : twice_l(twice) { assert(twice >= 0); }

    static constexpr RepLabel from_twice(int twice) { return RepLabel(twice); }
    static constexpr RepLabel integer(int l) { return RepLabel(2 * l); }

    constexpr int dim() const { return twice_l + 1; }
    constexpr bool is_integer() const { return twice_l % 2 == 0; }
    double value() const { return 0.5 * twice_l; }

    // Laplace eigenvalue of the matrix-entry eigenspace: -l(l+1).
    double laplace_eigenvalue() const { return -0.25 * double(twice_l) * double(twice_l + 2); }
    // |xi| = sqrt(l(l+1))
    double freq() const { return 0.5 * std::sqrt(double(twice_l) * double(twice_l + 2)); }
    // <xi> = (1 + l(l+1))^{1/2}
    double bracket() const { return std::sqrt(1.0 + 0.25 * double(twice_l) * double(twice_l + 2)); }

    // Matrix index of the weight m (given as 2m); rows/columns run m = -l..l.
    constexpr int index_of(int twice_m) const {
        assert(std::abs(twice_m) <= twice_l && (twice_m - twice_l) % 2 == 0);
        return (twice_m + twice_l) / 2;
    }
    constexpr int twice_m_at(int index) const { return 2 * index - twice_l; }

    friend constexpr auto operator<=>(RepLabel a, RepLabel b) = default;

    std::string str() const {
        if (is_integer()) return std::to_string(twice_l / 2);
        return std::to_string(twice_l) + "/2";
    }
};

inline double laplace_multiplier(RepLabel l) { return l.laplace_eigenvalue(); }

}  // namespace paragroup
