#include "chanlab/ode.hpp"

namespace chanlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kCenterTol = 1e-12;
} // namespace

FaceOrbit periodic_orbit_on_face(const GameParams& params, Face face,
                                 const std::array<double, 2>& seed,
                                 const IntegratorConfig& cfg_in) {
    const FaceReducedField red = face_reduced_field(params, face);
    const double cx = red.x_star(), cy = red.y_star();
    if (!(seed[0] > 0.0 && seed[0] < 1.0 && seed[1] > 0.0 && seed[1] < 1.0))
        throw std::domain_error("periodic_orbit_on_face: seed outside the open face square");

    FaceOrbit out;
    out.face = face;
    out.seed = seed;

    const double dx = seed[0] - cx, dy = seed[1] - cy;
    if (std::hypot(dx, dy) < kCenterTol) {
        // zero-amplitude orbit: report the linearization period
        out.degenerate = true;
        out.period = kTwoPi / omega_lin(red);
        out.energy = 0.0;
        out.record.dim = 2;
        out.record.times = {0.0};
        out.record.states = {seed[0], seed[1]};
        out.record.derivs = {0.0, 0.0};
        return out;
    }

    auto rhs = reduced_face_rhs(red);

    // signed area of (p - c) against (seed - c); rising or falling depending
    // on the initial angular velocity
    EventSpec ray;
    ray.id = "ray_return";
    ray.fn = [cx, cy, dx, dy](double, const double* v) {
        return (v[0] - cx) * dy - (v[1] - cy) * dx;
    };
    double f0[2];
    const double v0[2] = {seed[0], seed[1]};
    rhs(0.0, v0, f0);
    const double gdot0 = f0[0] * dy - f0[1] * dx;
    ray.direction = (gdot0 >= 0.0) ? +1 : -1;
    ray.terminal = true;

    IntegratorConfig cfg = cfg_in;
    const double t_lin = kTwoPi / omega_lin(red);
    if (cfg.max_time <= 0.0 || cfg.max_time == IntegratorConfig{}.max_time)
        cfg.max_time = 200.0 * t_lin;

    OrbitRecord rec = integrate(rhs, 2, v0, cfg, {ray});
    const auto hits = find_section_crossing(rec, "ray_return");
    if (hits.empty())
        throw std::runtime_error("periodic_orbit_on_face: no return within max_time");

    out.period = hits.front().t;
    out.energy = face_energy(red, seed[0], seed[1]);
    out.closure_defect =
        std::hypot(hits.front().state[0] - seed[0], hits.front().state[1] - seed[1]);
    out.record = std::move(rec);
    return out;
}

} // namespace chanlab
