#pragma once

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "chanlab/fields.hpp"

namespace chanlab {

// Saddle-center toy model near the invariant disc: parametric normal-form
// ODE, the section-to-section local map, the affine global map along the
// connecting channel, and the (z, r, phi) return map obtained from their
// composition.

struct ToyModelSpec {
    FieldSeries1D p;     // unstable rate, > 0
    FieldSeries1D sigma; // stable rate, < 0, with p + sigma < 0
    FieldSeries1D omega; // disc rotation frequency
    FieldSeries2D p0, sigma0, r0, omega0; // remainder shapes on their monomials
    double h = 0.1;      // section offset, S1 = {v1 = h}, S2 = {v2 = h}

    ToyModelSpec(FieldSeries1D p_, FieldSeries1D sigma_, FieldSeries1D omega_,
                 FieldSeries2D p0_ = {}, FieldSeries2D sigma0_ = {}, FieldSeries2D r0_ = {},
                 FieldSeries2D omega0_ = {}, double h_ = 0.1);
};

/// normal-form vector field on (v1, v2, r, phi)
std::function<void(double, const double*, double*)> normal_form_rhs(const ToyModelSpec& m);

struct LocalMapResult {
    double v2, r, phi;
    double flight_time;
};

// Leading-order section map S2 -> S1: flight time tau = -ln(v1_0/h)/p(r),
// v2_out = h (v1_0/h)^{-sigma/p}, phi advances by tau * omega(r).
LocalMapResult local_shilnikov_map(const ToyModelSpec& m, double v1_0, double r, double phi);

struct GlobalMapSpec {
    FieldSeries2D a1; // > 0 on the grid (its logarithm enters the return map)
    FieldSeries2D b0; // maps into [0,1]
    FieldSeries2D b1, c0, c1;
    // the v1-constant term vanishes along the channel; the type carries no a0

    GlobalMapSpec(FieldSeries2D a1_, FieldSeries2D b0_, FieldSeries2D b1_ = {},
                  FieldSeries2D c0_ = {}, FieldSeries2D c1_ = {});
};

struct GlobalMapResult {
    double v1, r, phi;
};

/// truncated global map S1 -> S2, linear in v2
GlobalMapResult global_map(const GlobalMapSpec& g, double v2, double r, double phi);

struct ReturnMapResult {
    double v2, r, phi;
    double flight_time;
};

/// full return map S1 -> S1: global then local
ReturnMapResult composed_return_map(const ToyModelSpec& m, const GlobalMapSpec& g, double v2,
                                    double r, double phi);

enum class ZMapMode { truncated, extended };

struct ZState {
    double z;
    double r;
    double phi;
};

struct ZMapCoeffs {
    FieldSeries2D Omega, Gamma, b0, c;
    ZMapMode mode = ZMapMode::truncated;
    bool z_mod_one = false;
    // extended-mode remainder amplitudes and shapes (O(z e^z), O(e^z) classes)
    double eps_z = 0.0, eps_r = 0.0, eps_phi = 0.0;
    FieldSeries2D rho_z, rho_r, rho_phi;

    void validate() const;
    /// the constant integer exponent required by z-mod-one mode
    int gamma_int() const;
};

ZState z_return_map(const ZMapCoeffs& k, const ZState& s);

/// 3x3 derivative of the truncated map, row-major; mod-1 seams differentiate
/// as the identity
std::array<double, 9> zmap_jacobian(const ZMapCoeffs& k, const ZState& s);

struct CoeffsFitResult {
    ZMapCoeffs coeffs;
    double fit_residual; // max abs error of the basis refit on a denser grid
};

// Composite coefficient fields of the rescaled return map, refit into the
// series basis by least squares on an oversampled grid:
//   Gamma = -sigma(b0)/p(b0)
//   c     = c0 - (omega(b0)/p(b0)) ln a1          (constant term wrapped to [0,1))
//   Omega = -(omega(b0)/p(b0)) ln a1 * Gamma
// The sign of Omega follows from conjugating the composed map with
// z -> -omega/p * z, which also produces the +z phase row.
CoeffsFitResult coeffs_from_model(const ToyModelSpec& m, const GlobalMapSpec& g,
                                  double max_residual = 1e-6);

/// least-squares refit of an arbitrary function into the series basis
FieldSeries2D fit_field2d(const std::function<double(double, double)>& f, double* residual);

// --- generic map-handle orbit utilities ---

using ZMapFn = std::function<ZState(const ZState&)>;
using ZMapJacFn = std::function<std::array<double, 9>(const ZState&)>;

ZMapFn make_map_fn(const ZMapCoeffs& k);
ZMapJacFn make_jacobian_fn(const ZMapCoeffs& k);

struct IterateResult {
    long completed = 0;
    bool escaped = false; // r left [0,1]
};

/// n forward images streamed to the sink; stops early on escape
IterateResult iterate_orbit(const ZMapFn& map, const ZState& start, long n,
                            const std::function<void(long, const ZState&)>& sink);

struct LyapunovResult {
    std::array<double, 3> exponents{}; // sorted descending, -inf sentinels last
    long steps = 0;
    bool escaped = false;
};

/// Benettin QR along the orbit; rank-deficient directions report -inf
LyapunovResult lyapunov_spectrum(const ZMapFn& map, const ZMapJacFn& jac, const ZState& start,
                                 long n, int qr_every = 1, long transient = 0);

} // namespace chanlab
