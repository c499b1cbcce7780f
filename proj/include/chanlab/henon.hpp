#pragma once

#include <array>

#include "chanlab/toymap.hpp"

namespace chanlab {

// Explicit polynomial coefficient family for which the truncated return map
// is conjugate, near its fixed point at the origin, to a 3-dim quadratic
// normal form (y, w, x + y - w + A y^2 + B y w + C w^2 + h.o.t.). The
// dependent coefficients come from printed closed forms; a finite-difference
// oracle on the conjugated map decides whether the transcription is
// consistent rather than trusting the formulas.

struct HenonFamily {
    double a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0; // Omega-family
    double b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0; // b-family
    double c1 = 0, c3 = 0;                         // c-family
    int gamma = 2;

    // u := phi (1 - phi)
    double Omega(double r, double phi) const;
    double bfield(double r, double phi) const;
    double cfield(double r) const;
    void Omega_partials(double r, double phi, double& dr, double& dphi) const;
    void bfield_partials(double r, double phi, double& dr, double& dphi) const;
    double cfield_derivative(double r) const;
};

/// dependent coefficients (a2, c1, a1, b4, b3, b5) from the printed closed
/// forms; throws on a near-zero denominator
HenonFamily solve_dependent_coefficients(double a3, double b1, double b2, int gamma,
                                         double a4 = 0.0, double a5 = 0.0, double c3 = 0.0);

/// the family's return map; `mod_one` wraps z and phi, the local chart
/// around the origin uses the unwrapped germ
ZState henon_map(const HenonFamily& fam, const ZState& s, bool mod_one);

ZMapFn henon_map_fn(const HenonFamily& fam);      // wrapped, for orbit runs
ZMapJacFn henon_jacobian_fn(const HenonFamily& fam);

/// chart x := phi, y := z + c(r), w := Omega(r,phi) + Gamma z + c(b(r,phi))
std::array<double, 3> to_xyw_coordinates(const HenonFamily& fam, const ZState& s);

/// inverse chart near the origin (scalar Newton in r); throws if it fails
/// to converge within 50 steps
ZState from_xyw_coordinates(const HenonFamily& fam, const std::array<double, 3>& xyw);

struct NormalFormQuadratics {
    double A = 0, B = 0, C = 0;
    std::array<double, 3> linear_residuals{};  // |T3'_x - 1|, |T3'_y - 1|, |T3'_w + 1|
    std::array<double, 3> second_residuals{};  // |T3''_xx|, |T3''_xy|, |T3''_xw|
    double lorenz_value = 0.0;                 // (C - A)(A - B + C)
    bool satisfied = false;
};

/// 2-jet of the conjugated third component at the fixed point by central
/// differences with one Richardson step (step and step/2)
NormalFormQuadratics extract_normal_form_quadratics(const HenonFamily& fam, double step = 1e-3);

// Same extraction for the variant third component that keeps the pre-image z
// in place of the image z in the chart formula, i.e.
//   T3 = Omega(r', phi') + Gamma z + c(b(r', phi')),  (r', phi') the image.
// The dependent-coefficient closed forms are consistent with this variant;
// the genuine conjugation has trace Gamma + b1 at the fixed point, so its
// linear part cannot generally match (1, 1, -1). Both jets are reported so
// the discrepancy is measurable rather than hidden.
NormalFormQuadratics extract_normal_form_quadratics_preimage_z(const HenonFamily& fam,
                                                               double step = 1e-3);

struct LorenzCondition {
    double value;
    bool satisfied;
};

LorenzCondition lorenz_condition(const NormalFormQuadratics& q);

} // namespace chanlab
