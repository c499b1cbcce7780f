#include "chanlab/channel.hpp"

#include <cmath>
#include <cstdio>

#include <Eigen/Dense>

#include "chanlab/rng.hpp"
#include "checks.hpp"

using namespace chanlab;

namespace {

/// full 4-dim Jacobian of the replicator field by central differences
Eigen::Matrix4d fd_jacobian(const GameParams& p, const SimplexState& s, double h = 1e-5) {
    Eigen::Matrix4d J;
    for (int j = 0; j < 4; ++j) {
        SimplexState sp = s, sm = s;
        double* cp = j == 0 ? &sp.x1 : j == 1 ? &sp.x2 : j == 2 ? &sp.y1 : &sp.y2;
        double* cm = j == 0 ? &sm.x1 : j == 1 ? &sm.x2 : j == 2 ? &sm.y1 : &sm.y2;
        *cp += h;
        *cm -= h;
        const auto vp = vector_field(p, sp);
        const auto vm = vector_field(p, sm);
        for (int i = 0; i < 4; ++i) J(i, j) = (vp[i] - vm[i]) / (2.0 * h);
    }
    return J;
}

/// sum of the two (real) transverse eigenvalues of the full Jacobian
double transverse_eigensum(const GameParams& p, const SimplexState& s) {
    const Eigen::EigenSolver<Eigen::Matrix4d> es(fd_jacobian(p, s));
    // two eigenvalues are real, the center pair is purely imaginary
    std::array<std::pair<double, double>, 4> lams;
    for (int i = 0; i < 4; ++i)
        lams[i] = {std::fabs(es.eigenvalues()[i].imag()), es.eigenvalues()[i].real()};
    std::sort(lams.begin(), lams.end());
    return lams[0].second + lams[1].second;
}

} // namespace

int main() {
    SplitMix64 rng(1618);

    { // successor cycle, exhaustively
        CHECK(successor(Face::a) == Face::d);
        CHECK(successor(Face::d) == Face::c);
        CHECK(successor(Face::c) == Face::e);
        CHECK(successor(Face::e) == Face::f);
        CHECK(successor(Face::f) == Face::b);
        CHECK(successor(Face::b) == Face::a);
        testutil::pass("successor cycle");
    }

    { // degenerate-orbit rate equals period x transverse eigenvalue sum
        for (int i = 0; i < 10; ++i) {
            const GameParams p(1.8 * rng.uniform() - 0.9, 1.8 * rng.uniform() - 0.9);
            const auto red = face_reduced_field(p, Face::b);
            const FaceOrbit deg = periodic_orbit_on_face(p, Face::b, {red.x_star(), red.y_star()});
            const RateResult r = transverse_rate_integral(p, deg);
            const double expect =
                r.period * transverse_eigensum(p, embed_on_face(Face::b, red.x_star(),
                                                                red.y_star()));
            CHECK_NEAR(r.rate / expect, 1.0, 1e-8);
        }
        testutil::pass("degenerate rate oracle");
    }

    { // relabeling-symmetric faces carry equal rates
        const GameParams p(0.37, -0.52);
        IntegratorConfig tight;
        tight.rel_tol = 1e-12;
        tight.abs_tol = 1e-14;
        tight.max_time = 1e4;
        const auto seed_b = seed_from_energy(p, Face::b, 0.08);
        const FaceOrbit orbit_b = periodic_orbit_on_face(p, Face::b, seed_b, tight);
        const RateResult rate_b = transverse_rate_integral(p, orbit_b);

        // image of the seed on face e = z3_image(b)
        const SimplexState on_e = snap_to_faces(z3_relabel(embed_on_face(Face::b, seed_b[0],
                                                                         seed_b[1])));
        const auto in_e = face_coordinates(Face::e, on_e);
        const FaceOrbit orbit_e = periodic_orbit_on_face(p, Face::e, {in_e[0], in_e[1]}, tight);
        const RateResult rate_e = transverse_rate_integral(p, orbit_e);

        CHECK_NEAR(rate_b.period, rate_e.period, 1e-8);
        CHECK_NEAR(rate_b.rate, rate_e.rate, 1e-9);
        testutil::pass("Z3 rate symmetry");
    }

    { // quadrature node doubling
        const GameParams p(0.2, -0.3);
        const FaceOrbit orbit = periodic_orbit_on_face(p, Face::b, seed_from_energy(p, Face::b, 0.15));
        const RateResult r = transverse_rate_integral(p, orbit);
        CHECK(r.quad_delta <= 1e-9);
        testutil::pass("quadrature doubling");
    }

    { // non-closed record is rejected
        const GameParams p(0.2, -0.3);
        FaceOrbit fake = periodic_orbit_on_face(p, Face::b, seed_from_energy(p, Face::b, 0.1));
        fake.closure_defect = 1.0;
        CHECK_THROWS(transverse_rate_integral(p, fake), std::invalid_argument);
        testutil::pass("closure guard");
    }

    { // the six per-face rates are finite; the loop sum is data, not a claim
        const GameParams p(0.41, 0.11);
        double sum = 0.0;
        for (Face f : kAllFaces) {
            const FaceOrbit orbit = periodic_orbit_on_face(p, f, seed_from_energy(p, f, 0.1));
            const RateResult r = transverse_rate_integral(p, orbit);
            CHECK(std::isfinite(r.rate));
            sum += r.rate;
        }
        std::printf("       loop rate sum at (0.41, 0.11), E=0.1: %.6f\n", sum);
        testutil::pass("six-face rates finite");
    }

    { // energy-labeled seeds reproduce their label on both orientations
        const GameParams p(-0.3, 0.6);
        for (Face f : {Face::b, Face::c}) {
            const auto red = face_reduced_field(p, f);
            for (double e : {0.01, 0.1, 0.5}) {
                const auto s = seed_from_energy(p, f, e);
                CHECK_NEAR(energy_label(red, s[0], s[1]), e, 1e-10);
            }
        }
        // the conserved quantity itself is negative definite on face c
        const auto sc = seed_from_energy(p, Face::c, 0.1);
        CHECK(face_energy(p, Face::c, sc[0], sc[1]) < 0.0);
        CHECK_THROWS(seed_from_energy(p, Face::c, 1e9), std::invalid_argument);
        testutil::pass("energy seeds");
    }

    { // scattering: delta = 0 rejected outright
        const GameParams p(0.3, -0.2);
        ScatterConfig cfg;
        cfg.delta = 0.0;
        CHECK_THROWS(scattering_map_estimate(p, Face::b, {0.1}, {0.0}, cfg),
                     std::invalid_argument);
        testutil::pass("zero offset rejected");
    }

    { // scattering refinement: halving delta reparametrizes the image curve
      // by a circle diffeomorphism (the departure-phase drift), so the
      // convergent object is the curve as a set; its extremum is tracked
      // through a phase sweep with parabolic refinement
        const GameParams p(0.3, -0.2);
        const int nphase = 96;
        std::vector<double> phases(nphase);
        for (int i = 0; i < nphase; ++i) phases[i] = static_cast<double>(i) / nphase;

        auto refined_max = [&](double delta) {
            ScatterConfig cfg;
            cfg.delta = delta;
            const auto samples = scattering_map_estimate(p, Face::b, {0.1}, phases, cfg);
            int imax = 0;
            for (int i = 0; i < nphase; ++i) {
                CHECK(!samples[i].failed);
                CHECK(samples[i].target == Face::a);
                if (samples[i].target_energy > samples[imax].target_energy) imax = i;
            }
            const double em = samples[(imax + nphase - 1) % nphase].target_energy;
            const double e0 = samples[imax].target_energy;
            const double ep = samples[(imax + 1) % nphase].target_energy;
            const double denom = em - 2.0 * e0 + ep;
            if (std::fabs(denom) < 1e-14) return e0;
            const double t = 0.5 * (em - ep) / denom;
            return e0 - 0.25 * (em - ep) * t;
        };

        std::vector<double> maxima;
        for (double delta : {4e-3, 1e-3, 2.5e-4, 6.25e-5}) maxima.push_back(refined_max(delta));
        const double d1 = std::fabs(maxima[1] - maxima[0]);
        const double d2 = std::fabs(maxima[2] - maxima[1]);
        const double d3 = std::fabs(maxima[3] - maxima[2]);
        std::printf("       image-extremum refinement diffs: %.3e %.3e %.3e\n", d1, d2, d3);
        CHECK(d2 < d1 && d3 < d2);
        testutil::pass("delta refinement");
    }

    { // phase sweep fills the sample table in grid order
        const GameParams p(0.3, -0.2);
        ScatterConfig cfg;
        cfg.delta = 1e-4;
        const std::vector<double> phases{0.0, 0.2, 0.4, 0.6, 0.8};
        const auto samples = scattering_map_estimate(p, Face::b, {0.05, 0.2}, phases, cfg);
        CHECK(samples.size() == 10);
        int ok = 0;
        for (const auto& s : samples)
            if (!s.failed) ++ok;
        std::printf("       scattering sweep: %d/10 samples landed\n", ok);
        CHECK(ok >= 8);
        testutil::pass("phase sweep");
    }

    { // shadowing: invariants and bit-exact reproducibility across threads
        ShadowParams sp;
        sp.grid_min = -0.3;
        sp.grid_max = -0.1;
        sp.grid_step = 0.2;
        sp.n = 16;
        sp.kmax = 6;
        sp.seed = 77;
        sp.max_time = 2000.0;
        sp.threads = 1;
        const auto cells1 = shadowing_sweep(sp);
        sp.threads = 2;
        const auto cells2 = shadowing_sweep(sp);
        CHECK(cells1.size() == 4 && cells2.size() == 4);
        for (size_t i = 0; i < cells1.size(); ++i) {
            CHECK(cells1[i].fraction[0] == 1.0);
            for (int k = 1; k <= sp.kmax; ++k) {
                CHECK(cells1[i].fraction[k] <= cells1[i].fraction[k - 1]);
                CHECK(cells1[i].fraction[k] == cells2[i].fraction[k]);
            }
        }
        testutil::pass("shadow sweep invariants and determinism");
    }

    { // parameter guards
        ShadowParams sp;
        sp.delta = 0.1;
        sp.rho = 0.05;
        CHECK_THROWS(shadowing_sweep(sp), std::invalid_argument);
        testutil::pass("shadow guards");
    }

    return testutil::failures();
}
