#include "chanlab/cone.hpp"

#include <cmath>
#include <stdexcept>

#include "chanlab/rng.hpp"

namespace chanlab {

namespace {

PartialBounds bounds_on_grid(const ZMapCoeffs& k, int n) {
    PartialBounds b;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double r = static_cast<double>(i) / (n - 1);
            const double ph = static_cast<double>(j) / n;
            double dr, dp;
            k.Omega.partials(r, ph, dr, dp);
            b.omega_r = std::max(b.omega_r, std::fabs(dr));
            b.omega_phi = std::max(b.omega_phi, std::fabs(dp));
            k.Gamma.partials(r, ph, dr, dp);
            b.gamma_r = std::max(b.gamma_r, std::fabs(dr));
            b.gamma_phi = std::max(b.gamma_phi, std::fabs(dp));
            k.b0.partials(r, ph, dr, dp);
            b.b_r = std::max(b.b_r, std::fabs(dr));
            b.b_phi = std::max(b.b_phi, std::fabs(dp));
            k.c.partials(r, ph, dr, dp);
            b.c_r = std::max(b.c_r, std::fabs(dr));
            b.c_phi = std::max(b.c_phi, std::fabs(dp));
        }
    return b;
}

} // namespace

PartialBounds partial_bounds(const ZMapCoeffs& k, int n) {
    if (n < 200) throw std::invalid_argument("partial_bounds: grid must be at least 200x200");
    PartialBounds coarse = bounds_on_grid(k, n);
    PartialBounds fine = bounds_on_grid(k, 2 * n);
    double delta = 0.0;
    delta = std::max(delta, std::fabs(fine.omega_r - coarse.omega_r));
    delta = std::max(delta, std::fabs(fine.omega_phi - coarse.omega_phi));
    delta = std::max(delta, std::fabs(fine.gamma_r - coarse.gamma_r));
    delta = std::max(delta, std::fabs(fine.gamma_phi - coarse.gamma_phi));
    delta = std::max(delta, std::fabs(fine.b_r - coarse.b_r));
    delta = std::max(delta, std::fabs(fine.b_phi - coarse.b_phi));
    delta = std::max(delta, std::fabs(fine.c_r - coarse.c_r));
    delta = std::max(delta, std::fabs(fine.c_phi - coarse.c_phi));
    fine.refine_delta = delta;
    return fine;
}

ConeCheck check_cone_invariance(const PartialBounds& b, double gamma, const ConeParams& cone) {
    if (!(gamma > 1.0))
        throw std::invalid_argument("check_cone_invariance: Gamma must exceed 1");
    const double cnorm = std::sqrt(b.c_r * b.c_r + b.c_phi * b.c_phi);
    const double sq = b.b_r * b.b_r + b.b_phi * b.b_phi + b.c_r * b.c_r + b.c_phi * b.c_phi;
    const double lhs = 1.0 + sq * cone.L * cone.L + 2.0 * cone.L * cnorm;
    const double rhs =
        cone.L * cone.L * (1.0 - cone.c_cone) * (1.0 - cone.c_cone) * gamma * gamma;

    const double onorm = std::sqrt(b.omega_r * b.omega_r + b.omega_phi * b.omega_phi);
    bool in_interval = cone.L > 0.0 && cone.L < 1.0 && cone.c_cone > 0.0 && cone.c_cone < 1.0;
    if (onorm > 0.0) in_interval = in_interval && cone.L < cone.c_cone * gamma / onorm;
    return ConeCheck{lhs, rhs, lhs < rhs && in_interval};
}

FeasibleCone feasible_cone_params(const PartialBounds& b, double gamma) {
    if (!(gamma > 1.0))
        throw std::invalid_argument("feasible_cone_params: Gamma must exceed 1");
    const double onorm = std::sqrt(b.omega_r * b.omega_r + b.omega_phi * b.omega_phi);
    FeasibleCone best;
    for (int ci = 1; ci <= 99; ++ci) {
        const double c = 0.01 * ci;
        double lmax = 1.0;
        if (onorm > 0.0) lmax = std::min(1.0, c * gamma / onorm);
        for (int li = 1; li <= 100; ++li) {
            const double L = lmax * li / 101.0;
            const ConeCheck chk = check_cone_invariance(b, gamma, ConeParams{L, c});
            if (chk.holds && chk.rhs - chk.lhs > best.margin) {
                best.feasible = true;
                best.params = ConeParams{L, c};
                best.margin = chk.rhs - chk.lhs;
            }
        }
    }
    return best;
}

long monte_carlo_cone_check(const ZMapCoeffs& k, const ConeParams& cone, long samples,
                            uint64_t seed) {
    if (k.mode != ZMapMode::truncated)
        throw std::invalid_argument("monte_carlo_cone_check: truncated mode required");
    (void)k.gamma_int(); // constant integer Gamma >= 2 required

    long violations = 0;
    for (long i = 0; i < samples; ++i) {
        SplitMix64 rng = substream(seed, static_cast<uint64_t>(i));
        const ZState s{rng.uniform(), rng.uniform(), rng.uniform()};
        const double v1 = rng.next() & 1 ? 1.0 : -1.0;
        const double q = rng.uniform_open(0.0, 1.0);
        const double theta = rng.uniform() * 2.0 * M_PI;
        const double rad = q * cone.L * std::fabs(v1);
        const double v2 = rad * std::cos(theta), v3 = rad * std::sin(theta);

        const auto J = zmap_jacobian(k, s);
        const double w1 = J[0] * v1 + J[1] * v2 + J[2] * v3;
        const double w2 = J[3] * v1 + J[4] * v2 + J[5] * v3;
        const double w3 = J[6] * v1 + J[7] * v2 + J[8] * v3;
        if (!(std::hypot(w2, w3) < cone.L * std::fabs(w1))) ++violations;
    }
    return violations;
}

} // namespace chanlab
