#include "chanlab/ode.hpp"

#include <cmath>

#include "chanlab/rng.hpp"
#include "checks.hpp"

using namespace chanlab;

namespace {

auto rsp_rhs(const GameParams& p) {
    return [p](double, const double* y, double* dy) {
        const auto v = vector_field(p, SimplexState{y[0], y[1], y[2], y[3]});
        for (int i = 0; i < 4; ++i) dy[i] = v[i];
    };
}

double face_energy_drift(const GameParams& p, Face face, const std::array<double, 2>& seed,
                         double t, double rel, double abs) {
    const auto red = face_reduced_field(p, face);
    IntegratorConfig cfg;
    cfg.rel_tol = rel;
    cfg.abs_tol = abs;
    cfg.max_time = t;
    const double start[2] = {seed[0], seed[1]};
    const OrbitRecord rec = integrate(reduced_face_rhs(red), 2, start, cfg);
    const double e0 = face_energy(red, seed[0], seed[1]);
    double worst = 0.0;
    for (size_t i = 0; i < rec.times.size(); ++i)
        worst = std::max(worst,
                         std::fabs(face_energy(red, rec.state_at(i)[0], rec.state_at(i)[1]) - e0));
    return worst;
}

} // namespace

int main() {
    SplitMix64 rng(7);
    (void)rng;

    { // zero field: state unchanged
        auto rhs = [](double, const double*, double* dy) { dy[0] = 0.0; dy[1] = 0.0; };
        IntegratorConfig cfg;
        cfg.max_time = 10.0;
        const double y0[2] = {0.7, -0.2};
        const OrbitRecord rec = integrate(rhs, 2, y0, cfg);
        CHECK(rec.state_at(rec.times.size() - 1)[0] == 0.7);
        CHECK(rec.state_at(rec.times.size() - 1)[1] == -0.2);
        testutil::pass("zero field");
    }

    { // exponential decay
        auto rhs = [](double, const double* y, double* dy) { dy[0] = -y[0]; };
        IntegratorConfig cfg;
        cfg.max_time = 1.0;
        const double y0[1] = {1.0};
        const OrbitRecord rec = integrate(rhs, 1, y0, cfg);
        CHECK_NEAR(rec.state_at(rec.times.size() - 1)[0], std::exp(-1.0), 1e-9);
        testutil::pass("exp decay");
    }

    { // face-orbit energy drift at default tolerances
        const GameParams p(0.3, -0.2);
        CHECK(face_energy_drift(p, Face::b, {0.5, 0.5}, 100.0, 1e-10, 1e-12) <= 1e-8);
        testutil::pass("energy drift t=100");
    }

    { // drift never grows when rel_tol is halved (4 levels)
        const GameParams p(-0.4, 0.25);
        double prev = 1e300;
        for (double rel : {1e-6, 5e-7, 2.5e-7, 1.25e-7}) {
            const double d = face_energy_drift(p, Face::c, {0.45, 0.52}, 50.0, rel, rel * 1e-2);
            CHECK(d <= prev);
            prev = d;
        }
        testutil::pass("tolerance monotonicity");
    }

    { // linear crossing located to the time tolerance
        auto rhs = [](double, const double*, double* dy) { dy[0] = 1.0; };
        IntegratorConfig cfg;
        cfg.max_time = 2.0;
        EventSpec ev{"hit", [](double, const double* y) { return y[0] - 1.0; }, +1, 1e-10, false};
        const double y0[1] = {0.0};
        const OrbitRecord rec = integrate(rhs, 1, y0, cfg, {ev});
        const auto hits = find_section_crossing(rec, "hit");
        CHECK(hits.size() == 1);
        CHECK_NEAR(hits[0].t, 1.0, 1e-10);
        CHECK_THROWS(find_section_crossing(rec, "nope"), std::invalid_argument);
        testutil::pass("event location");
    }

    { // rotation: ray crossings one period apart, opposite-ray filtered out
        auto rhs = [](double, const double* y, double* dy) {
            dy[0] = -y[1];
            dy[1] = y[0];
        };
        IntegratorConfig cfg;
        cfg.max_time = 10.0;
        // the positive-x ray is { y = 0 } with rising crossing
        EventSpec ev{"ray", [](double, const double* y) { return y[1]; }, +1, 1e-10, false};
        const double y0[2] = {std::cos(-0.1), std::sin(-0.1)};
        const OrbitRecord rec = integrate(rhs, 2, y0, cfg, {ev});
        const auto hits = find_section_crossing(rec, "ray");
        CHECK(hits.size() == 2);
        CHECK_NEAR(hits[1].t - hits[0].t, 2.0 * M_PI, 1e-8);
        CHECK(hits[0].state[0] > 0.0); // on the ray, not the opposite one

        // located events satisfy |g| <= 10 * time_tol * ||field||
        for (const auto& h : hits) {
            double f[2];
            rhs(h.t, h.state.data(), f);
            const double fn = std::hypot(f[0], f[1]);
            CHECK(std::fabs(h.state[1]) <= 10.0 * 1e-10 * fn);
        }
        testutil::pass("rotation crossings");
    }

    { // no sign change -> empty crossing list
        auto rhs = [](double, const double*, double* dy) { dy[0] = 1.0; };
        IntegratorConfig cfg;
        cfg.max_time = 1.0;
        EventSpec ev{"far", [](double, const double* y) { return y[0] - 50.0; }, 0, 1e-10, false};
        const double y0[1] = {0.0};
        const OrbitRecord rec = integrate(rhs, 1, y0, cfg, {ev});
        CHECK(find_section_crossing(rec, "far").empty());
        testutil::pass("no crossing");
    }

    { // event relocation is bit-exact on the same dense output
        const GameParams p(0.1, 0.1);
        const auto red = face_reduced_field(p, Face::b);
        IntegratorConfig cfg;
        cfg.max_time = 30.0;
        EventSpec ev{"x_half", [](double, const double* y) { return y[0] - 0.45; }, 0, 1e-10,
                     false};
        const double y0[2] = {0.5, 0.55};
        const OrbitRecord rec1 = integrate(reduced_face_rhs(red), 2, y0, cfg, {ev});
        const OrbitRecord rec2 = integrate(reduced_face_rhs(red), 2, y0, cfg, {ev});
        const auto h1 = find_section_crossing(rec1, "x_half");
        const auto h2 = find_section_crossing(rec2, "x_half");
        CHECK(h1.size() == h2.size() && !h1.empty());
        for (size_t i = 0; i < h1.size(); ++i) CHECK(h1[i].t == h2[i].t);
        testutil::pass("deterministic bisection");
    }

    { // coordinates starting at exact zero stay exact zero
        const GameParams p(0.6, -0.3);
        IntegratorConfig cfg;
        cfg.max_time = 50.0;
        const double y0[4] = {0.0, 0.4, 0.3, 0.0};
        const OrbitRecord rec = integrate(rsp_rhs(p), 4, y0, cfg);
        for (size_t i = 0; i < rec.times.size(); ++i) {
            CHECK(rec.state_at(i)[0] == 0.0);
            CHECK(rec.state_at(i)[3] == 0.0);
        }
        testutil::pass("exact-zero invariance");
    }

    { // NaN field reports failure and keeps the last valid state
        auto rhs = [](double t, const double* y, double* dy) {
            dy[0] = t < 1.0 ? 1.0 : std::nan("");
            (void)y;
        };
        IntegratorConfig cfg;
        cfg.max_time = 5.0;
        const double y0[1] = {0.0};
        const OrbitRecord rec = integrate(rhs, 1, y0, cfg);
        CHECK(rec.failed);
        CHECK(rec.times.back() <= 1.0 + 1e-6);
        testutil::pass("NaN handling");
    }

    { // step exhaustion flags truncation
        const GameParams p(0.1, -0.1);
        IntegratorConfig cfg;
        cfg.max_time = 1e6;
        cfg.max_steps = 5;
        const double y0[4] = {0.1, 0.3, 0.3, 0.2};
        const OrbitRecord rec = integrate(rsp_rhs(p), 4, y0, cfg);
        CHECK(rec.truncated);
        testutil::pass("step budget");
    }

    { // periodic orbit: degenerate seed and small amplitudes
        const GameParams p(0.2, 0.35);
        const auto red = face_reduced_field(p, Face::b);
        const double xs = red.x_star(), ys = red.y_star();
        const double t_lin = 2.0 * M_PI / omega_lin(red);

        const FaceOrbit deg = periodic_orbit_on_face(p, Face::b, {xs, ys});
        CHECK(deg.degenerate);
        CHECK_NEAR(deg.period, t_lin, 1e-12);

        const FaceOrbit small = periodic_orbit_on_face(p, Face::b, {xs + 1e-3, ys});
        CHECK(!small.degenerate);
        CHECK_NEAR(small.period / t_lin, 1.0, 1e-3);
        CHECK(small.closure_defect <= 1e-7);

        const FaceOrbit big = periodic_orbit_on_face(p, Face::b, {0.8, ys});
        CHECK(big.closure_defect <= 1e-7);
        const double e0 = big.energy;
        double worst = 0.0;
        for (size_t i = 0; i < big.record.times.size(); ++i)
            worst = std::max(worst, std::fabs(face_energy(red, big.record.state_at(i)[0],
                                                          big.record.state_at(i)[1]) -
                                              e0));
        CHECK(worst <= 1e-8);
        testutil::pass("periodic orbits on the face");
    }

    { // unreachable return within max_time reports an error
        const GameParams p(0.2, 0.35);
        IntegratorConfig cfg;
        cfg.max_time = 1e-3;
        CHECK_THROWS(periodic_orbit_on_face(p, Face::b, {0.7, 0.5}, cfg), std::runtime_error);
        testutil::pass("no-return error");
    }

    { // seed outside the open square
        const GameParams p(0.2, 0.35);
        CHECK_THROWS(periodic_orbit_on_face(p, Face::b, {0.0, 0.5}, IntegratorConfig{}),
                     std::domain_error);
        testutil::pass("bad seed rejected");
    }

    return testutil::failures();
}
