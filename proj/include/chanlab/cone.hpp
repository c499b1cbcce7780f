#pragma once

#include <cstdint>

#include "chanlab/toymap.hpp"

namespace chanlab {

// Partial-hyperbolicity check for the truncated map: the cone family
// ||(v2,v3)|| < L |v1| is carried into itself by the map derivative when the
// coefficient partials are small against Gamma. Sup-norms come from a finite
// grid; consistent with the artifact's non-rigorous numerics.

struct PartialBounds {
    double omega_r = 0, omega_phi = 0;
    double gamma_r = 0, gamma_phi = 0;
    double b_r = 0, b_phi = 0;
    double c_r = 0, c_phi = 0;
    double refine_delta = 0; // max change when the grid is doubled once
};

/// sup-norms of the coefficient partials over an n x n grid (n >= 200)
PartialBounds partial_bounds(const ZMapCoeffs& k, int n = 256);

struct ConeParams {
    double L;      // half-aperture, in (0,1)
    double c_cone; // the admissible-interval parameter in (0,1)
};

struct ConeCheck {
    double lhs, rhs;
    bool holds;
};

// 1 + (b_r^2 + b_phi^2 + c_r^2 + c_phi^2) L^2 + 2 L sqrt(c_r^2 + c_phi^2)
//   <  L^2 (1 - c_cone)^2 Gamma^2,
// with L restricted to (0, c_cone Gamma / sqrt(omega_r^2 + omega_phi^2)).
ConeCheck check_cone_invariance(const PartialBounds& b, double gamma, const ConeParams& cone);

struct FeasibleCone {
    bool feasible = false;
    ConeParams params{0, 0};
    double margin = 0; // rhs - lhs at the returned pair
};

/// grid search over c_cone in {0.01..0.99} and 100 L values in the
/// admissible interval; returns the margin-maximizing pair
FeasibleCone feasible_cone_params(const PartialBounds& b, double gamma);

/// random tangent vectors on the cone boundary scaled inward; counts images
/// of the exact derivative falling outside the cone
long monte_carlo_cone_check(const ZMapCoeffs& k, const ConeParams& cone, long samples,
                            uint64_t seed);

} // namespace chanlab
