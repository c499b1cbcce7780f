#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace chanlab {

// Bimatrix Rock-Scissors-Paper replicator system on the product of two
// 2-simplices, reduced to coordinates (x1, x2, y1, y2) with x3 = 1-x1-x2 and
// y3 = 1-y1-y2. Tie rewards eps_x, eps_y enter the circulant payoff matrices.

struct GameParams {
    double eps_x;
    double eps_y;

    GameParams(double ex, double ey) : eps_x(ex), eps_y(ey) {
        if (!(ex > -1.0 && ex < 1.0) || !(ey > -1.0 && ey < 1.0))
            throw std::invalid_argument("GameParams: tie rewards must lie strictly in (-1,1)");
    }
};

struct SimplexState {
    double x1, x2, y1, y2;

    double x3() const { return 1.0 - x1 - x2; }
    double y3() const { return 1.0 - y1 - y2; }

    bool valid(double slack = 1e-9) const {
        return x1 >= -slack && x2 >= -slack && x1 + x2 <= 1.0 + slack && y1 >= -slack &&
               y2 >= -slack && y1 + y2 <= 1.0 + slack;
    }
};

/// coordinates within 1e-14 of zero are snapped to zero (face-membership tests)
SimplexState snap_to_faces(SimplexState s);

enum class Face { a, b, c, d, e, f };

constexpr std::array<Face, 6> kAllFaces{Face::a, Face::b, Face::c, Face::d, Face::e, Face::f};

const char* face_name(Face f);
Face face_from_name(const std::string& name);

/// next face along the heteroclinic cycle a->d->c->e->f->b->a
Face successor(Face f);

struct FaceDef {
    int x_zero;  // 1..3, the vanishing x coordinate
    int y_zero;  // 1..3, the vanishing y coordinate
    int x_coord; // 1..3, in-face x coordinate (lowest available index)
    int y_coord; // 1..3, in-face y coordinate
};

const FaceDef& face_def(Face f);

/// cyclic relabeling (x1,x2,x3)->(x2,x3,x1), (y1,y2,y3)->(y2,y3,y1)
SimplexState z3_relabel(const SimplexState& s);
/// image of a face under the relabeling: cycles (a f c) and (b e d)
Face z3_image(Face f);

/// payoff products A.y and B.x as 3-vectors with the simplex substitutions
std::array<double, 3> payoff_ay(const GameParams& p, double y1, double y2);
std::array<double, 3> payoff_bx(const GameParams& p, double x1, double x2);

/// replicator vector field, d/dt of (x1, x2, y1, y2)
std::array<double, 4> vector_field(const GameParams& p, const SimplexState& s);

struct Equilibrium {
    Face face;
    SimplexState point;
    double x_star; // in-face coordinates of the face center
    double y_star;
};

/// the six (1,2,1)-type equilibria Z^a..Z^f from their closed forms
std::array<Equilibrium, 6> equilibria(const GameParams& p);

// In the face's in-face coordinates (x, y) the restricted dynamics is
// separable: dx/dt = x(1-x) f(y), dy/dt = y(1-y) g(x) with affine f, g.
struct FaceReducedField {
    Face face;
    double alpha_f, beta_f; // f(y) = beta_f + alpha_f * y
    double alpha_g, beta_g; // g(x) = beta_g + alpha_g * x
    int x_coord, y_coord;   // orientation metadata: simplex indices played by (x, y)

    double f(double y) const { return beta_f + alpha_f * y; }
    double g(double x) const { return beta_g + alpha_g * x; }
    double x_star() const { return -beta_g / alpha_g; }
    double y_star() const { return -beta_f / alpha_f; }
};

FaceReducedField face_reduced_field(const GameParams& p, Face face);

/// embed in-face coordinates into the 4-dim state (zeroed coordinates exact 0)
SimplexState embed_on_face(Face face, double x, double y);
/// read the in-face coordinates back off a 4-dim state
std::array<double, 2> face_coordinates(Face face, const SimplexState& s);

// Conserved energy of the separable face dynamics, E = G(x) - F(y) with
// G'(x) = g(x)/(x(1-x)) and F'(y) = f(y)/(y(1-y)); for affine pieces
// int (beta + alpha v)/(v(1-v)) dv = beta ln v - (alpha+beta) ln(1-v).
// Normalized so that E = 0 at the face center.
double face_energy(const FaceReducedField& red, double x, double y);
double face_energy(const GameParams& p, Face face, double x, double y);

/// gradient (dE/dx, dE/dy), used by conservation and center checks
std::array<double, 2> face_energy_gradient(const FaceReducedField& red, double x, double y);

// E is positive definite on faces a, b, d and negative definite on c, e, f
// (the in-face orientation flips); |E| serves as the orientation-free orbit
// label used by the experiments.
double energy_label(const FaceReducedField& red, double x, double y);

/// linearization frequency at the face center: w^2 = x*(1-x*) y*(1-y*) |f'||g'|
double omega_lin(const FaceReducedField& red);

/// transverse bracket values (V1, V2): growth rates of the two zeroed
/// coordinates at a point of the face
std::array<double, 2> transverse_rates(const GameParams& p, Face face, double x, double y);

} // namespace chanlab
