#include "chanlab/henon.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace chanlab {

namespace {
constexpr double kDenomTol = 1e-12;

void check_denominator(double d, const char* what) {
    if (std::fabs(d) < kDenomTol)
        throw std::invalid_argument(std::string("degenerate family: vanishing denominator in ") +
                                    what);
}

inline double pw(double x, int n) {
    double r = 1.0;
    for (int i = 0; i < n; ++i) r *= x;
    return r;
}
} // namespace

double HenonFamily::Omega(double r, double phi) const {
    const double u = phi * (1.0 - phi);
    return a1 * r + a2 * u + a3 * r * r + a4 * r * u + a5 * u * u;
}

double HenonFamily::bfield(double r, double phi) const {
    const double u = phi * (1.0 - phi);
    return b1 * r + b2 * u + b3 * r * r + b4 * r * u + b5 * u * u;
}

double HenonFamily::cfield(double r) const { return c1 * r + c3 * r * r * r; }

void HenonFamily::Omega_partials(double r, double phi, double& dr, double& dphi) const {
    const double u = phi * (1.0 - phi), du = 1.0 - 2.0 * phi;
    dr = a1 + 2.0 * a3 * r + a4 * u;
    dphi = (a2 + a4 * r + 2.0 * a5 * u) * du;
}

void HenonFamily::bfield_partials(double r, double phi, double& dr, double& dphi) const {
    const double u = phi * (1.0 - phi), du = 1.0 - 2.0 * phi;
    dr = b1 + 2.0 * b3 * r + b4 * u;
    dphi = (b2 + b4 * r + 2.0 * b5 * u) * du;
}

double HenonFamily::cfield_derivative(double r) const { return c1 + 3.0 * c3 * r * r; }

HenonFamily solve_dependent_coefficients(double a3, double b1, double b2, int gamma, double a4,
                                         double a5, double c3) {
    if (gamma < 2) throw std::invalid_argument("solve_dependent_coefficients: Gamma must be >= 2");
    const double G = gamma;
    check_denominator(b2, "c1 (b2)");
    check_denominator(1.0 + b1, "a1 (1+b1)");
    check_denominator(1.0 + b1 + 2.0 * G, "c1 (1+b1+2G)");
    check_denominator(-1.0 + b1, "b5 ((-1+b1)^2)");

    HenonFamily f;
    f.a3 = a3;
    f.a4 = a4;
    f.a5 = a5;
    f.b1 = b1;
    f.b2 = b2;
    f.c3 = c3;
    f.gamma = gamma;

    f.a2 = -b1 - 2.0 * G;
    f.c1 = (1.0 - f.a2) * (1.0 + b1) / (b2 * (1.0 + b1 + 2.0 * G));
    f.a1 = f.c1 * (2.0 * G - b1 - b1 * b1) / (1.0 + b1);

    // b4 depends only on the free coefficients
    {
        const double num =
            -b2 *
            (a4 * (-1.0 + b1) *
                 (G + pw(b1, 4) * pw(-1.0 + G, 2) * G + pw(b1, 5) * pw(-1.0 + G, 2) * G -
                  6.0 * pw(G, 3) + 8.0 * pw(G, 5) +
                  pw(b1, 3) * (-1.0 + 4.0 * G - 3.0 * G * G - 3.0 * pw(G, 3) + 2.0 * pw(G, 4)) +
                  b1 * (-1.0 + 5.0 * G - 5.0 * G * G - 6.0 * pw(G, 3) + 6.0 * pw(G, 4)) +
                  b1 * b1 * (-2.0 + 8.0 * G - 4.0 * G * G - 15.0 * pw(G, 3) + 12.0 * pw(G, 4))) +
             2.0 * b2 *
                 (pw(b1, 7) * c3 * pw(-1.0 + G, 2) * G -
                  G * (1.0 + G) * pw(-1.0 + 2.0 * G, 3) * (2.0 * a3 + c3 - 2.0 * c3 * G) +
                  b1 * b1 * c3 * (1.0 - 2.0 * G - 2.0 * G * G + 5.0 * pw(G, 3)) +
                  pw(b1, 5) * c3 *
                      (-1.0 + 3.0 * G - G * G - 4.0 * pw(G, 3) + 2.0 * pw(G, 4)) +
                  pw(b1, 4) * c3 *
                      (-1.0 + 3.0 * G + G * G - 11.0 * pw(G, 3) + 8.0 * pw(G, 4)) +
                  pw(b1, 3) * c3 *
                      (1.0 - 3.0 * G + 6.0 * pw(G, 3) - 6.0 * pw(G, 4) + 4.0 * pw(G, 5)) +
                  b1 * G *
                      (a3 * (2.0 - 6.0 * G + 8.0 * pw(G, 3)) +
                       c3 * (1.0 - 9.0 * G + 15.0 * G * G + 8.0 * pw(G, 3) - 20.0 * pw(G, 4)))));
        const double den =
            (-1.0 + b1) * (1.0 + b1) *
            (G + pw(b1, 4) * pw(-1.0 + G, 2) * G + pw(b1, 5) * pw(-1.0 + G, 2) * G - 2.0 * G * G +
             pw(b1, 3) * (-1.0 + 4.0 * G - 3.0 * G * G - 3.0 * pw(G, 3) + 2.0 * pw(G, 4)) +
             b1 * (-1.0 + 5.0 * G - 7.0 * G * G - 4.0 * pw(G, 3) + 10.0 * pw(G, 4)) +
             b1 * b1 * (-2.0 + 8.0 * G - 4.0 * G * G - 15.0 * pw(G, 3) + 12.0 * pw(G, 4)));
        check_denominator(den, "b4");
        f.b4 = num / den;
    }

    // b3 uses b4
    {
        const double b4 = f.b4;
        const double num = -b1 * b4 + pw(b1, 3) * b4 + 2.0 * pw(b1, 3) * b2 * b2 * c3 +
                           2.0 * pw(b1, 4) * b2 * b2 * c3 + b1 * b4 * G - pw(b1, 3) * b4 * G -
                           4.0 * b2 * b2 * c3 * G - 2.0 * b1 * b1 * b2 * b2 * c3 * G -
                           4.0 * pw(b1, 3) * b2 * b2 * c3 * G - 2.0 * pw(b1, 4) * b2 * b2 * c3 * G -
                           2.0 * b4 * G * G + 2.0 * b1 * b4 * G * G + 8.0 * b2 * b2 * c3 * G * G +
                           a4 * b1 * b2 * (-1.0 + b1 + G - b1 * G) -
                           2.0 * a3 * b2 * b2 * (-1.0 + b1 * b1 * (-1.0 + G) + 2.0 * G + b1 * G);
        const double den = 2.0 * b2 *
                           (-1.0 + pw(b1, 3) * (-1.0 + G) + 4.0 * G * G +
                            b1 * b1 * (-1.0 + 2.0 * G) + b1 * (-1.0 + 3.0 * G));
        check_denominator(den, "b3");
        f.b3 = num / den;
    }

    // b5 uses b3 and b4
    {
        const double b3c = f.b3, b4 = f.b4;
        const double inner =
            a3 * b2 * b2 *
                (1.0 + b1 * b1 * pw(-1.0 + G, 2) - 4.0 * G + 2.0 * b1 * (-1.0 + G) * G +
                 5.0 * G * G) -
            (-1.0 + b1) * G *
                ((-1.0 + a5 + b1 - a5 * b1) * G + b4 * (-1.0 + 2.0 * G) * (1.0 + b1 + 2.0 * G)) +
            b2 * b2 * c3 *
                (pw(b1, 4) * pw(-1.0 + G, 2) + 2.0 * b1 * (-1.0 + G) * G +
                 2.0 * pw(b1, 3) * (-1.0 + G) * G + G * (-2.0 + 9.0 * G - 8.0 * G * G) +
                 b1 * b1 * (1.0 - 2.0 * G + 2.0 * G * G)) +
            b2 * (a4 * G * (-1.0 + b1 + 2.0 * G - 2.0 * b1 * G) +
                  b3c * (1.0 + pw(b1, 3) * pw(-1.0 + G, 2) - 2.0 * G - 3.0 * G * G +
                         8.0 * pw(G, 3) + b1 * b1 * (1.0 - 4.0 * G + 3.0 * G * G) +
                         b1 * (1.0 - 6.0 * G + 7.0 * G * G)));
        const double den = pw(-1.0 + b1, 2) * G * G * (1.0 + b1 + 2.0 * G);
        check_denominator(den, "b5");
        f.b5 = -(b2 * inner) / den;
    }
    return f;
}

ZState henon_map(const HenonFamily& fam, const ZState& s, bool mod_one) {
    const double zn = fam.Omega(s.r, s.phi) + fam.gamma * s.z;
    const double rn = fam.bfield(s.r, s.phi);
    const double pn = fam.cfield(s.r) + s.z;
    if (mod_one) return ZState{wrap_unit(zn), rn, wrap_unit(pn)};
    return ZState{zn, rn, pn};
}

ZMapFn henon_map_fn(const HenonFamily& fam) {
    return [fam](const ZState& s) { return henon_map(fam, s, true); };
}

ZMapJacFn henon_jacobian_fn(const HenonFamily& fam) {
    return [fam](const ZState& s) -> std::array<double, 9> {
        double Or, Op, br, bp;
        fam.Omega_partials(s.r, s.phi, Or, Op);
        fam.bfield_partials(s.r, s.phi, br, bp);
        return {static_cast<double>(fam.gamma), Or, Op, 0.0, br, bp,
                1.0, fam.cfield_derivative(s.r), 0.0};
    };
}

std::array<double, 3> to_xyw_coordinates(const HenonFamily& fam, const ZState& s) {
    return {s.phi, s.z + fam.cfield(s.r),
            fam.Omega(s.r, s.phi) + fam.gamma * s.z + fam.cfield(fam.bfield(s.r, s.phi))};
}

ZState from_xyw_coordinates(const HenonFamily& fam, const std::array<double, 3>& xyw) {
    const double x = xyw[0], y = xyw[1], w = xyw[2];
    // z eliminated through y = z + c(r); scalar Newton for r
    double r = 0.0;
    for (int it = 0; it < 50; ++it) {
        const double cr = fam.cfield(r);
        const double br = fam.bfield(r, x);
        const double psi = fam.Omega(r, x) + fam.gamma * (y - cr) + fam.cfield(br) - w;
        double Or, Op, bdr, bdp;
        fam.Omega_partials(r, x, Or, Op);
        fam.bfield_partials(r, x, bdr, bdp);
        const double dpsi =
            Or - fam.gamma * fam.cfield_derivative(r) + fam.cfield_derivative(br) * bdr;
        if (std::fabs(dpsi) < 1e-14)
            throw std::runtime_error("from_xyw_coordinates: singular chart derivative");
        const double step = psi / dpsi;
        r -= step;
        if (std::fabs(psi) < 1e-13 && std::fabs(step) < 1e-12)
            return ZState{y - fam.cfield(r), r, x};
    }
    throw std::runtime_error("from_xyw_coordinates: Newton failed, point outside the chart");
}

namespace {

// third component of the conjugated map, the quantity whose 2-jet is wanted
double t3(const HenonFamily& fam, double x, double y, double w) {
    const ZState s = from_xyw_coordinates(fam, {x, y, w});
    const ZState sn = henon_map(fam, s, /*mod_one=*/false);
    return to_xyw_coordinates(fam, sn)[2];
}

// variant with the pre-image z retained in the chart's third component
double t3_preimage_z(const HenonFamily& fam, double x, double y, double w) {
    const ZState s = from_xyw_coordinates(fam, {x, y, w});
    const double rn = fam.bfield(s.r, s.phi);
    const double pn = fam.cfield(s.r) + s.z;
    return fam.Omega(rn, pn) + fam.gamma * s.z + fam.cfield(fam.bfield(rn, pn));
}

struct Jet2 {
    double g[3];    // gradient
    double h[3][3]; // Hessian
};

template <class F>
Jet2 fd_jet_of(F&& f, double s) {
    Jet2 J{};
    const double f0 = f(0, 0, 0);
    double e[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int i = 0; i < 3; ++i) {
        const double fp = f(s * e[i][0], s * e[i][1], s * e[i][2]);
        const double fm = f(-s * e[i][0], -s * e[i][1], -s * e[i][2]);
        J.g[i] = (fp - fm) / (2.0 * s);
        J.h[i][i] = (fp - 2.0 * f0 + fm) / (s * s);
    }
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            double pp[3] = {0, 0, 0}, pm[3] = {0, 0, 0}, mp[3] = {0, 0, 0}, mm[3] = {0, 0, 0};
            pp[i] = s;
            pp[j] = s;
            pm[i] = s;
            pm[j] = -s;
            mp[i] = -s;
            mp[j] = s;
            mm[i] = -s;
            mm[j] = -s;
            const double v = (f(pp[0], pp[1], pp[2]) - f(pm[0], pm[1], pm[2]) -
                              f(mp[0], mp[1], mp[2]) + f(mm[0], mm[1], mm[2])) /
                             (4.0 * s * s);
            J.h[i][j] = J.h[j][i] = v;
        }
    return J;
}

template <class F>
NormalFormQuadratics extract_jet(const HenonFamily& fam, double step, F&& f) {
    if (!(step >= 1e-6 && step <= 1e-3))
        throw std::invalid_argument("extract_normal_form_quadratics: step outside [1e-6, 1e-3]");

    const ZState fix = henon_map(fam, ZState{0.0, 0.0, 0.0}, false);
    if (std::fabs(fix.z) > 1e-10 || std::fabs(fix.r) > 1e-10 || std::fabs(fix.phi) > 1e-10)
        throw std::runtime_error("extract_normal_form_quadratics: fixed point not at the origin");

    const Jet2 J1 = fd_jet_of(f, step);
    const Jet2 J2 = fd_jet_of(f, step / 2.0);
    Jet2 J{};
    for (int i = 0; i < 3; ++i) {
        J.g[i] = (4.0 * J2.g[i] - J1.g[i]) / 3.0;
        for (int j = 0; j < 3; ++j) J.h[i][j] = (4.0 * J2.h[i][j] - J1.h[i][j]) / 3.0;
    }

    NormalFormQuadratics q;
    q.linear_residuals = {std::fabs(J.g[0] - 1.0), std::fabs(J.g[1] - 1.0),
                          std::fabs(J.g[2] + 1.0)};
    q.second_residuals = {std::fabs(J.h[0][0]), std::fabs(J.h[0][1]), std::fabs(J.h[0][2])};
    q.A = 0.5 * J.h[1][1];
    q.B = J.h[1][2];
    q.C = 0.5 * J.h[2][2];
    q.lorenz_value = (q.C - q.A) * (q.A - q.B + q.C);
    q.satisfied = q.lorenz_value > 0.0;
    return q;
}

} // namespace

NormalFormQuadratics extract_normal_form_quadratics(const HenonFamily& fam, double step) {
    return extract_jet(fam, step,
                       [&](double x, double y, double w) { return t3(fam, x, y, w); });
}

NormalFormQuadratics extract_normal_form_quadratics_preimage_z(const HenonFamily& fam,
                                                               double step) {
    return extract_jet(fam, step,
                       [&](double x, double y, double w) { return t3_preimage_z(fam, x, y, w); });
}

LorenzCondition lorenz_condition(const NormalFormQuadratics& q) {
    return LorenzCondition{q.lorenz_value, q.lorenz_value > 0.0};
}

} // namespace chanlab
