#include "chanlab/rsp.hpp"

#include <cmath>

#include "chanlab/rng.hpp"
#include "checks.hpp"

using namespace chanlab;

namespace {

double residual_norm(const GameParams& p, const SimplexState& s) {
    const auto v = vector_field(p, s);
    return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
}

GameParams random_params(SplitMix64& rng) {
    return GameParams(1.8 * rng.uniform() - 0.9, 1.8 * rng.uniform() - 0.9);
}

} // namespace

int main() {
    SplitMix64 rng(42);

    { // parameter validation
        CHECK_THROWS(GameParams(1.0, 0.0), std::invalid_argument);
        CHECK_THROWS(GameParams(0.0, -1.0), std::invalid_argument);
        testutil::pass("GameParams validation");
    }

    { // fully symmetric interior point is stationary
        const GameParams p(0.37, -0.81);
        const double third = 1.0 / 3.0;
        const auto v = vector_field(p, SimplexState{third, third, third, third});
        for (double c : v) CHECK_NEAR(c, 0.0, 1e-14);
        testutil::pass("interior Nash point");
    }

    { // printed Z^b is an equilibrium at (0.5, -0.25)
        const GameParams p(0.5, -0.25);
        const SimplexState zb{0.0, (1.0 + p.eps_y) / (3.0 + p.eps_y),
                              (1.0 - p.eps_x) / (3.0 - p.eps_x), 0.0};
        CHECK(residual_norm(p, zb) <= 1e-12);
        testutil::pass("Z^b residual");
    }

    { // a zeroed coordinate gives an exactly zero component
        const GameParams p(0.2, 0.4);
        const auto v = vector_field(p, SimplexState{0.0, 0.35, 0.2, 0.3});
        CHECK(v[0] == 0.0);
        testutil::pass("exact face invariance of the field");
    }

    { // closed-form equilibria at (0, 0)
        const auto eqs = equilibria(GameParams(0.0, 0.0));
        CHECK_NEAR(eqs[0].point.x1, 0.0, 0.0);
        CHECK_NEAR(eqs[0].point.x2, 2.0 / 3.0, 1e-15);
        CHECK_NEAR(eqs[0].point.y1, 1.0 / 3.0, 1e-15);
        CHECK_NEAR(eqs[0].point.y2, 2.0 / 3.0, 1e-15);
        CHECK_NEAR(eqs[2].point.x1, 1.0 / 3.0, 1e-15);
        CHECK_NEAR(eqs[2].point.x2, 0.0, 0.0);
        CHECK_NEAR(eqs[2].point.y1, 0.0, 0.0);
        CHECK_NEAR(eqs[2].point.y2, 1.0 / 3.0, 1e-15);
        testutil::pass("printed equilibria at (0,0)");
    }

    { // residual oracle, 100 random parameter pairs + the coarse grid
        for (int i = 0; i < 100; ++i) {
            const GameParams p = random_params(rng);
            for (const auto& eq : equilibria(p)) CHECK(residual_norm(p, eq.point) <= 1e-12);
        }
        for (double ex = -0.9; ex <= 0.9 + 1e-12; ex += 0.1)
            for (double ey = -0.9; ey <= 0.9 + 1e-12; ey += 0.1) {
                const GameParams p(std::min(ex, 0.9), std::min(ey, 0.9));
                for (const auto& eq : equilibria(p)) CHECK(residual_norm(p, eq.point) <= 1e-12);
            }
        testutil::pass("equilibria residuals");
    }

    { // reduced field on face b: closed form and the vector-field oracle
        const GameParams p(0.31, -0.47);
        const auto red = face_reduced_field(p, Face::b);
        CHECK_NEAR(red.beta_f, 1.0 - p.eps_x, 1e-15);
        CHECK_NEAR(red.alpha_f, -(3.0 - p.eps_x), 1e-15);
        CHECK_NEAR(red.beta_g, -(1.0 + p.eps_y), 1e-15);
        CHECK_NEAR(red.alpha_g, 3.0 + p.eps_y, 1e-15);

        const auto eqs = equilibria(p);
        CHECK_NEAR(red.y_star(), eqs[1].point.y1, 1e-12);
        CHECK_NEAR(red.x_star(), eqs[1].point.x2, 1e-12);

        // center condition
        CHECK_NEAR(red.f(red.y_star()), 0.0, 1e-15);
        CHECK_NEAR(red.g(red.x_star()), 0.0, 1e-15);
        testutil::pass("face b reduced field closed form");
    }

    { // reduced field matches the 4-dim field on every face, 1e3 points
        for (int i = 0; i < 1000; ++i) {
            const GameParams p = random_params(rng);
            const Face f = kAllFaces[rng.next() % 6];
            const auto red = face_reduced_field(p, f);
            const double x = rng.uniform_open(0.0, 1.0), y = rng.uniform_open(0.0, 1.0);
            const SimplexState s = embed_on_face(f, x, y);
            const auto v = vector_field(p, s);
            const auto in = face_coordinates(f, s);
            CHECK_NEAR(in[0], x, 1e-14);
            CHECK_NEAR(in[1], y, 1e-14);
            // d/dt of the in-face coordinates from the 4-dim field
            const FaceDef& d = face_def(f);
            const double dx_full = d.x_coord == 1 ? v[0] : (d.x_coord == 2 ? v[1] : -v[0] - v[1]);
            const double dy_full = d.y_coord == 1 ? v[2] : (d.y_coord == 2 ? v[3] : -v[2] - v[3]);
            CHECK_NEAR(dx_full, x * (1.0 - x) * red.f(y), 1e-12);
            CHECK_NEAR(dy_full, y * (1.0 - y) * red.g(x), 1e-12);
        }
        testutil::pass("reduced field vs vector_field on all faces");
    }

    { // energy: zero and critical at the center, boundary rejected,
      // and the separable identity E_x xdot + E_y ydot = 0
        const GameParams p(0.12, 0.55);
        for (Face f : kAllFaces) {
            const auto red = face_reduced_field(p, f);
            CHECK_NEAR(face_energy(red, red.x_star(), red.y_star()), 0.0, 1e-14);
            const auto grad0 = face_energy_gradient(red, red.x_star(), red.y_star());
            CHECK_NEAR(grad0[0], 0.0, 1e-13);
            CHECK_NEAR(grad0[1], 0.0, 1e-13);
            for (int i = 0; i < 100; ++i) {
                const double x = rng.uniform_open(0.0, 1.0), y = rng.uniform_open(0.0, 1.0);
                const auto grad = face_energy_gradient(red, x, y);
                const double xdot = x * (1 - x) * red.f(y), ydot = y * (1 - y) * red.g(x);
                const double scale = std::max(1.0, std::fabs(grad[0] * xdot));
                CHECK_NEAR((grad[0] * xdot + grad[1] * ydot) / scale, 0.0, 1e-12);
            }
        }
        CHECK_THROWS(face_energy(p, Face::b, 0.0, 0.5), std::domain_error);
        CHECK_THROWS(face_energy(p, Face::b, 0.5, 1.0), std::domain_error);
        testutil::pass("face energy center and separable identity");
    }

    { // linearization frequency against the 2x2 Jacobian eigenvalues
        for (int i = 0; i < 20; ++i) {
            const GameParams p = random_params(rng);
            const Face f = kAllFaces[rng.next() % 6];
            const auto red = face_reduced_field(p, f);
            const double xs = red.x_star(), ys = red.y_star();
            // J = [[0, x(1-x) f'], [y(1-y) g', 0]] at the center
            const double j12 = xs * (1 - xs) * red.alpha_f;
            const double j21 = ys * (1 - ys) * red.alpha_g;
            CHECK(j12 * j21 < 0.0); // center: purely imaginary pair
            const double w = std::sqrt(-j12 * j21);
            CHECK_NEAR(omega_lin(red) / w, 1.0, 1e-10);
        }
        testutil::pass("omega_lin vs Jacobian");
    }

    { // Z3 relabeling commutes with the flow field
        for (int i = 0; i < 200; ++i) {
            const GameParams p = random_params(rng);
            SimplexState s{0.4 * rng.uniform(), 0.4 * rng.uniform(), 0.4 * rng.uniform(),
                           0.4 * rng.uniform()};
            const auto v = vector_field(p, s);
            const auto vr = vector_field(p, z3_relabel(s));
            // dR(v) for R(x1,x2,y1,y2) = (x2, 1-x1-x2, y2, 1-y1-y2)
            CHECK_NEAR(vr[0], v[1], 1e-13);
            CHECK_NEAR(vr[1], -v[0] - v[1], 1e-13);
            CHECK_NEAR(vr[2], v[3], 1e-13);
            CHECK_NEAR(vr[3], -v[2] - v[3], 1e-13);
        }
        testutil::pass("Z3 equivariance");
    }

    { // relabeling permutes faces consistently with the cycle
        for (Face f : kAllFaces) {
            CHECK(z3_image(successor(f)) == successor(z3_image(f)));
            const GameParams p(0.25, -0.45);
            const SimplexState s = embed_on_face(f, 0.3, 0.6);
            const SimplexState rs = snap_to_faces(z3_relabel(s));
            const FaceDef& d = face_def(z3_image(f));
            const double zx = d.x_zero == 1 ? rs.x1 : (d.x_zero == 2 ? rs.x2 : rs.x3());
            const double zy = d.y_zero == 1 ? rs.y1 : (d.y_zero == 2 ? rs.y2 : rs.y3());
            CHECK(zx == 0.0 && zy == 0.0);
        }
        testutil::pass("Z3 face permutation");
    }

    { // snapping
        const SimplexState s = snap_to_faces(SimplexState{5e-15, 0.3, -5e-15, 0.2});
        CHECK(s.x1 == 0.0 && s.y1 == 0.0);
        testutil::pass("boundary snapping");
    }

    return testutil::failures();
}
