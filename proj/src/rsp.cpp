#include "chanlab/rsp.hpp"

#include <cmath>

namespace chanlab {

namespace {

// payoff matrix rows for A = circ(eps, 1, -1); B has the same shape with eps_y
inline void payoff_matrix(double eps, double m[3][3]) {
    m[0][0] = eps;
    m[0][1] = 1.0;
    m[0][2] = -1.0;
    m[1][0] = -1.0;
    m[1][1] = eps;
    m[1][2] = 1.0;
    m[2][0] = 1.0;
    m[2][1] = -1.0;
    m[2][2] = eps;
}

constexpr double kSnapTol = 1e-14;

const FaceDef kFaceDefs[6] = {
    /* a */ {1, 3, 2, 1},
    /* b */ {1, 2, 2, 1},
    /* c */ {2, 1, 1, 2},
    /* d */ {2, 3, 1, 1},
    /* e */ {3, 1, 1, 2},
    /* f */ {3, 2, 1, 1},
};

const char* kFaceNames[6] = {"a", "b", "c", "d", "e", "f"};

} // namespace

SimplexState snap_to_faces(SimplexState s) {
    auto snap = [](double v) { return std::fabs(v) < kSnapTol ? 0.0 : v; };
    s.x1 = snap(s.x1);
    s.x2 = snap(s.x2);
    s.y1 = snap(s.y1);
    s.y2 = snap(s.y2);
    return s;
}

const char* face_name(Face f) { return kFaceNames[static_cast<int>(f)]; }

Face face_from_name(const std::string& name) {
    for (int i = 0; i < 6; ++i)
        if (name == kFaceNames[i]) return static_cast<Face>(i);
    throw std::invalid_argument("unknown face tag: " + name);
}

Face successor(Face f) {
    switch (f) {
    case Face::a: return Face::d;
    case Face::d: return Face::c;
    case Face::c: return Face::e;
    case Face::e: return Face::f;
    case Face::f: return Face::b;
    case Face::b: return Face::a;
    }
    throw std::logic_error("bad face");
}

const FaceDef& face_def(Face f) { return kFaceDefs[static_cast<int>(f)]; }

SimplexState z3_relabel(const SimplexState& s) {
    return SimplexState{s.x2, s.x3(), s.y2, s.y3()};
}

Face z3_image(Face f) {
    switch (f) {
    case Face::a: return Face::f;
    case Face::f: return Face::c;
    case Face::c: return Face::a;
    case Face::b: return Face::e;
    case Face::e: return Face::d;
    case Face::d: return Face::b;
    }
    throw std::logic_error("bad face");
}

std::array<double, 3> payoff_ay(const GameParams& p, double y1, double y2) {
    double a[3][3];
    payoff_matrix(p.eps_x, a);
    const double y[3] = {y1, y2, 1.0 - y1 - y2};
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) out[i] = a[i][0] * y[0] + a[i][1] * y[1] + a[i][2] * y[2];
    return out;
}

std::array<double, 3> payoff_bx(const GameParams& p, double x1, double x2) {
    double b[3][3];
    payoff_matrix(p.eps_y, b);
    const double x[3] = {x1, x2, 1.0 - x1 - x2};
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i) out[i] = b[i][0] * x[0] + b[i][1] * x[1] + b[i][2] * x[2];
    return out;
}

std::array<double, 4> vector_field(const GameParams& p, const SimplexState& s) {
    const auto ay = payoff_ay(p, s.y1, s.y2);
    const auto bx = payoff_bx(p, s.x1, s.x2);
    const double x3 = s.x3(), y3 = s.y3();
    const double xay = s.x1 * ay[0] + s.x2 * ay[1] + x3 * ay[2];
    const double ybx = s.y1 * bx[0] + s.y2 * bx[1] + y3 * bx[2];
    // the leading factor keeps zeroed coordinates exactly invariant
    return {s.x1 * (ay[0] - xay), s.x2 * (ay[1] - xay), s.y1 * (bx[0] - ybx),
            s.y2 * (bx[1] - ybx)};
}

std::array<Equilibrium, 6> equilibria(const GameParams& p) {
    const double ex = p.eps_x, ey = p.eps_y;
    std::array<Equilibrium, 6> out{};
    const SimplexState za{0.0, 2.0 / (3.0 - ey), (1.0 + ex) / (3.0 + ex), 2.0 / (3.0 + ex)};
    const SimplexState zb{0.0, (1.0 + ey) / (3.0 + ey), (1.0 - ex) / (3.0 - ex), 0.0};
    const SimplexState zc{(1.0 - ey) / (3.0 - ey), 0.0, 0.0, (1.0 + ex) / (3.0 + ex)};
    const SimplexState zd{2.0 / (3.0 + ey), 0.0, 2.0 / (3.0 - ex), (1.0 - ex) / (3.0 - ex)};
    const SimplexState ze{(1.0 + ey) / (3.0 + ey), 2.0 / (3.0 + ey), 0.0, 2.0 / (3.0 - ex)};
    const SimplexState zf{2.0 / (3.0 - ey), (1.0 - ey) / (3.0 - ey), 2.0 / (3.0 + ex), 0.0};
    const SimplexState pts[6] = {za, zb, zc, zd, ze, zf};
    for (int i = 0; i < 6; ++i) {
        const Face f = static_cast<Face>(i);
        const auto in = face_coordinates(f, pts[i]);
        out[i] = Equilibrium{f, pts[i], in[0], in[1]};
    }
    return out;
}

namespace {
inline double coord3(double c1, double c2, int idx) {
    return idx == 1 ? c1 : (idx == 2 ? c2 : 1.0 - c1 - c2);
}
} // namespace

FaceReducedField face_reduced_field(const GameParams& p, Face face) {
    const FaceDef& d = face_def(face);
    double a[3][3], b[3][3];
    payoff_matrix(p.eps_x, a);
    payoff_matrix(p.eps_y, b);

    // x-equation: dx/dt = x (1-x) [(A y)_i - (A y)_k], i the in-face x index,
    // k the remaining nonzero x index; y = y_c e_j + (1-y_c) e_m.
    const int i = d.x_coord - 1;
    const int k = 5 - d.x_zero - d.x_coord; // the remaining index, 0-based
    const int j = d.y_coord - 1;
    const int m = 5 - d.y_zero - d.y_coord;
    const double alpha_f = (a[i][j] - a[i][m]) - (a[k][j] - a[k][m]);
    const double beta_f = a[i][m] - a[k][m];

    // y-equation via B with the roles of the players swapped
    const double alpha_g = (b[j][i] - b[j][k]) - (b[m][i] - b[m][k]);
    const double beta_g = b[j][k] - b[m][k];

    return FaceReducedField{face, alpha_f, beta_f, alpha_g, beta_g, d.x_coord, d.y_coord};
}

SimplexState embed_on_face(Face face, double x, double y) {
    const FaceDef& d = face_def(face);
    double xs[4] = {0.0, 0.0, 0.0, 0.0}; // 1-based x1..x3 scratch
    double ys[4] = {0.0, 0.0, 0.0, 0.0};
    xs[d.x_zero] = 0.0;
    xs[d.x_coord] = x;
    xs[6 - d.x_zero - d.x_coord] = 1.0 - x;
    ys[d.y_zero] = 0.0;
    ys[d.y_coord] = y;
    ys[6 - d.y_zero - d.y_coord] = 1.0 - y;
    return SimplexState{xs[1], xs[2], ys[1], ys[2]};
}

std::array<double, 2> face_coordinates(Face face, const SimplexState& s) {
    const FaceDef& d = face_def(face);
    return {coord3(s.x1, s.x2, d.x_coord), coord3(s.y1, s.y2, d.y_coord)};
}

namespace {
// int (beta + alpha v) / (v (1-v)) dv = beta ln v - (alpha + beta) ln(1-v)
inline double separable_potential(double alpha, double beta, double v) {
    return beta * std::log(v) - (alpha + beta) * std::log1p(-v);
}
} // namespace

double face_energy(const FaceReducedField& red, double x, double y) {
    if (!(x > 0.0 && x < 1.0 && y > 0.0 && y < 1.0))
        throw std::domain_error("face_energy: point on face boundary");
    const double gx = separable_potential(red.alpha_g, red.beta_g, x);
    const double fy = separable_potential(red.alpha_f, red.beta_f, y);
    const double gx0 = separable_potential(red.alpha_g, red.beta_g, red.x_star());
    const double fy0 = separable_potential(red.alpha_f, red.beta_f, red.y_star());
    return (gx - gx0) - (fy - fy0);
}

double face_energy(const GameParams& p, Face face, double x, double y) {
    return face_energy(face_reduced_field(p, face), x, y);
}

std::array<double, 2> face_energy_gradient(const FaceReducedField& red, double x, double y) {
    return {red.g(x) / (x * (1.0 - x)), -red.f(y) / (y * (1.0 - y))};
}

double energy_label(const FaceReducedField& red, double x, double y) {
    return std::fabs(face_energy(red, x, y));
}

double omega_lin(const FaceReducedField& red) {
    const double xs = red.x_star(), ys = red.y_star();
    return std::sqrt(xs * (1.0 - xs) * ys * (1.0 - ys) * std::fabs(red.alpha_f) *
                     std::fabs(red.alpha_g));
}

std::array<double, 2> transverse_rates(const GameParams& p, Face face, double x, double y) {
    const FaceDef& d = face_def(face);
    const SimplexState s = embed_on_face(face, x, y);
    const auto ay = payoff_ay(p, s.y1, s.y2);
    const auto bx = payoff_bx(p, s.x1, s.x2);
    const double xay = s.x1 * ay[0] + s.x2 * ay[1] + s.x3() * ay[2];
    const double ybx = s.y1 * bx[0] + s.y2 * bx[1] + s.y3() * bx[2];
    return {ay[d.x_zero - 1] - xay, bx[d.y_zero - 1] - ybx};
}

} // namespace chanlab
