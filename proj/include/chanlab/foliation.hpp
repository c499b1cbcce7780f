#pragma once

#include <array>
#include <vector>

#include "chanlab/toymap.hpp"

namespace chanlab {

// Invariant-foliation solver for the 4-dim map (y, x) -> (G(x,y), F(x,y)),
// x = (z, r, phi) on S^1 x [0,1] x S^1, y = v2 >= 0. The leaves x = h(y) are
// generated by the fixed point of the graph transform
//   Gamma_V(mu)(x,y) = (A - mu(x',y') C)^{-1} (mu(x',y') D - B)
// on a grid of hyperplane slopes mu = dx/dy, interpolated multilinearly in x
// and linearly in ln y.

struct ExtendedMap4D {
    ZMapCoeffs coeffs;  // truncated x-rows; z mod 1, constant integer Gamma
    FieldSeries2D a1;   // y-row: y' = h (a1(r,phi) y / h)^Gamma
    double h = 0.1;
    bool with_remainders = true; // use the coeffs' amplitudes/shapes, y-weighted
    int gamma = 2;

    ExtendedMap4D(ZMapCoeffs k, FieldSeries2D a1_, double h_, bool with_remainders_ = true);

    /// (y, z, r, phi) -> image; remainder terms carry y ln y / y weights and
    /// vanish continuously at y = 0, where the x-rows reduce to the
    /// truncated map
    void apply(double y, const std::array<double, 3>& x, double& y_out,
               std::array<double, 3>& x_out) const;

    /// the truncated x-map alone (the y = 0 trace)
    ZState truncated(const ZState& s) const;
};

struct JacobianBlocks {
    std::array<double, 9> A{}; // dF/dx, row-major
    std::array<double, 3> B{}; // dF/dy
    std::array<double, 3> C{}; // dG/dx
    double D = 0;              // dG/dy
    double det_A = 0;
};

/// analytic blocks at (x, y), y in (0, y0]; throws when |det A| drops below
/// the floor (the foliation hypothesis fails for the model)
JacobianBlocks jacobian_blocks(const ExtendedMap4D& map, const std::array<double, 3>& x, double y,
                               double det_floor = 1e-4);

struct FoliationBounds {
    double A3 = 0;     // sup ||A^-1||
    double B2 = 0;     // sup ||B|| / |ln y|
    double C2 = 0;     // sup ||C|| / (y^Gamma |ln y|)
    double D2 = 0;     // sup |D| / y^(Gamma-1)
    double y_star = 0; // largest grid level where the contraction estimate is < 1
    double q = 0;      // measured contraction factor (final sweeps)
    double ball_norm = 0;  // sup ||mu0|| / |ln y|
    double ball_bound = 0; // 4 A3 B2
};

struct GridSpec {
    int nz = 16, nr = 12, nphi = 16;
    double y0 = 1e-4;
    double y_min = 1e-12;
};

class HyperplaneFieldGrid {
public:
    HyperplaneFieldGrid() = default;
    HyperplaneFieldGrid(const GridSpec& spec);

    int levels() const { return static_cast<int>(y_levels_.size()); }
    double level_y(int k) const { return y_levels_[k]; }
    const GridSpec& spec() const { return spec_; }

    double& at(int k, int iz, int ir, int ip, int comp) { return mu_[index(k, iz, ir, ip, comp)]; }
    double at(int k, int iz, int ir, int ip, int comp) const {
        return mu_[index(k, iz, ir, ip, comp)];
    }

    std::array<double, 3> node_x(int iz, int ir, int ip) const;

    /// multilinear in x (z, phi periodic; r clamped), linear in ln y; below
    /// the last level mu is extended proportionally to ln y, and mu(x,0) = 0
    std::array<double, 3> interp(const std::array<double, 3>& x, double y) const;

    /// weighted distance max ||mu_a - mu_b|| / |ln y| over all nodes
    static double weighted_distance(const HyperplaneFieldGrid& a, const HyperplaneFieldGrid& b);

    double weighted_norm() const; // sup ||mu|| / |ln y|

    void swap_data(HyperplaneFieldGrid& other) { mu_.swap(other.mu_); }

private:
    size_t index(int k, int iz, int ir, int ip, int comp) const {
        return (((static_cast<size_t>(k) * spec_.nz + iz) * spec_.nr + ir) * spec_.nphi + ip) * 3 +
               comp;
    }
    GridSpec spec_;
    std::vector<double> y_levels_;
    std::vector<double> mu_;
};

/// one graph-transform evaluation at (x, y) against an existing field
std::array<double, 3> gamma_v_apply(const HyperplaneFieldGrid& mu, const ExtendedMap4D& map,
                                    const std::array<double, 3>& x, double y,
                                    double det_floor = 1e-4);

struct FoliationResult {
    HyperplaneFieldGrid mu0;
    FoliationBounds bounds;
    int sweeps = 0;
    double residual = 0;  // weighted distance of the final sweep
    bool ball_ok = false; // ball_norm <= 4 A3 B2 * 1.1
};

/// iterate mu <- Gamma_V(mu) from mu = 0 in the weighted sup metric; throws
/// a divergence report naming the worst level when no contraction shows
FoliationResult fixed_point_field(const ExtendedMap4D& map, const GridSpec& spec,
                                  double tol = 1e-10, int max_sweeps = 200,
                                  double det_floor = 1e-4);

struct LeafCurve {
    std::array<double, 3> endpoint{}; // x(0) on {y = 0}, z and phi wrapped
    std::vector<std::array<double, 4>> samples; // (y, z, r, phi) along the leaf
    bool exited = false; // left the r-range before reaching y = 0
};

// Leaf through (x0, y0) integrated down to y = 0 using s = -1/ln(y):
// dx/ds = mu(x, e^{-1/s}) e^{-1/s} s^{-2}, a field that vanishes at s = 0.
LeafCurve integrate_leaf(const HyperplaneFieldGrid& mu, const std::array<double, 3>& x0, double y0,
                         double rel_tol = 1e-10);

struct CorrespondenceReport {
    // per-iterate maxima over all starts
    std::vector<double> step_gap;   // one-step commutation defect after leaf projection
    std::vector<double> step_drive; // |y ln y| entering that step (pre-image y)
    double max_gap = 0;
    double fitted_const = 0;            // max gap / drive over steps with drive > 0
    bool v2_decreasing_after_first = true;
    bool gap_decreasing_tail = true;    // defects nonincreasing once y < h e^-5
};

/// projects the 4-dim orbit along the leaves and measures, step by step, how
/// far the projections deviate from one application of the truncated map
CorrespondenceReport leaf_correspondence_check(const ExtendedMap4D& map,
                                               const HyperplaneFieldGrid& mu0,
                                               const std::vector<std::array<double, 4>>& starts,
                                               int n);

} // namespace chanlab
