#pragma once

#include <cstdint>
#include <vector>

#include "chanlab/fields.hpp"
#include "chanlab/ode.hpp"
#include "chanlab/rsp.hpp"

namespace chanlab {

// Numerics along the six-face heteroclinic channel: transverse rate integrals
// over face orbits, the face-to-face scattering estimate, and the shadowing
// parameter sweep.

struct RateResult {
    Face face;
    double energy;
    double period;
    double rate;       // integral of (V1 + V2) over one loop
    double quad_delta; // change under doubling the quadrature nodes
};

/// rate of transverse attraction/repulsion around a located face orbit; a
/// degenerate orbit reports period x (V1 + V2)(center)
RateResult transverse_rate_integral(const GameParams& p, const FaceOrbit& orbit,
                                    int quad_nodes = 4096);

struct ScatterSample {
    Face source;
    double source_energy;
    double phase; // time along the orbit / period, in [0,1)
    double delta;
    Face target;
    double target_energy;
    double flight_time;
    bool failed;
};

struct ScatterConfig {
    double delta = 1e-4;
    double rho = 0.05;
    double max_time = 1e4;
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
};

/// seed point on the source face with the given orbit label |E| along the +x
/// ray from the face center (bisection on the monotone |E| profile)
std::array<double, 2> seed_from_energy(const GameParams& p, Face face, double energy);

/// the zeroed coordinate of `face` that grows toward the successor is the
/// one not shared with the successor's invariant subspace
bool unstable_transverse_is_y(Face face);

/// Floquet exponent of the unstable transverse direction: the period average
/// of its growth rate around the orbit. Halving the offset delta delays the
/// departure by ln(2) over this exponent, which shifts the departure phase;
/// delta-refinement comparisons must compensate for that drift.
double floquet_unstable_exponent(const GameParams& p, const FaceOrbit& orbit);

// Displace orbit points off the face along the transverse coordinate that is
// not shared with the successor's subspace (the growing one; the shared
// coordinate stays exactly zero along the connection), integrate the full
// system until the successor's rho-neighborhood, and label the hit by the
// target's face energy.
std::vector<ScatterSample> scattering_map_estimate(const GameParams& p, Face source,
                                                   const std::vector<double>& energies,
                                                   const std::vector<double>& phases,
                                                   const ScatterConfig& cfg);

struct ShadowGridCell {
    double eps_x, eps_y;
    int n;
    double delta, rho;
    std::vector<double> fraction; // fraction[k], k = 0..kmax, share reaching >= k faces
};

struct ShadowParams {
    double grid_min = -0.9, grid_max = 0.9, grid_step = 0.1;
    int n = 1000;
    double delta = 1e-4;
    double rho = 0.05;
    int kmax = 60;
    uint64_t seed = 0;
    Face start = Face::b;
    double max_time = 1e4;
    // a correct transit at these scales finishes well inside this window;
    // points that stall near the boundary skeleton are cut off by it
    double transit_time = 400.0;
    double rel_tol = 1e-6; // sweep defaults, declared in the run manifest
    double abs_tol = 1e-9;
    int threads = 0; // 0 = hardware concurrency
};

/// consecutive-face visit count of one sampled point (exposed for tests)
int shadow_visit_count(const GameParams& p, const ShadowParams& sp, Face start,
                       const SimplexState& s0);

std::vector<ShadowGridCell> shadowing_sweep(const ShadowParams& sp);

struct MaskThreshold {
    double fraction;
    int k;
};

/// the four reported masks: 1% @ 60, 1% @ 12, 10% @ 6, 25% @ 6
constexpr std::array<MaskThreshold, 4> kShadowMasks{
    MaskThreshold{0.01, 60}, MaskThreshold{0.01, 12}, MaskThreshold{0.10, 6},
    MaskThreshold{0.25, 6}};

bool mask_value(const ShadowGridCell& cell, const MaskThreshold& t);

} // namespace chanlab
