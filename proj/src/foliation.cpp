#include "chanlab/foliation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "chanlab/ode.hpp"

namespace chanlab {

namespace {

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

inline double ylny(double y) { return y > 0.0 ? y * std::log(y) : 0.0; }

// spectral norm of the inverse of a 3x3 matrix: 1 / sigma_min via Jacobi
// eigenvalue sweeps on A^T A
double inverse_norm(const std::array<double, 9>& A) {
    double S[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += A[k * 3 + i] * A[k * 3 + j];
            S[i][j] = s;
        }
    for (int sweep = 0; sweep < 30; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 3; ++q) off += S[p][q] * S[p][q];
        if (off < 1e-30) break;
        for (int p = 0; p < 3; ++p)
            for (int q = p + 1; q < 3; ++q) {
                if (std::fabs(S[p][q]) < 1e-300) continue;
                const double theta = 0.5 * std::atan2(2.0 * S[p][q], S[q][q] - S[p][p]);
                const double c = std::cos(theta), s = std::sin(theta);
                for (int k = 0; k < 3; ++k) {
                    const double sp = S[p][k], sq = S[q][k];
                    S[p][k] = c * sp - s * sq;
                    S[q][k] = s * sp + c * sq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double sp = S[k][p], sq = S[k][q];
                    S[k][p] = c * sp - s * sq;
                    S[k][q] = s * sp + c * sq;
                }
            }
    }
    const double lmin = std::min({S[0][0], S[1][1], S[2][2]});
    if (lmin <= 0.0) return std::numeric_limits<double>::infinity();
    return 1.0 / std::sqrt(lmin);
}

// solve M v = b by Cramer with a conditioning guard
std::array<double, 3> solve3(const std::array<double, 9>& M, const std::array<double, 3>& b) {
    const double det = M[0] * (M[4] * M[8] - M[5] * M[7]) - M[1] * (M[3] * M[8] - M[5] * M[6]) +
                       M[2] * (M[3] * M[7] - M[4] * M[6]);
    double scale = 0.0;
    for (double v : M) scale = std::max(scale, std::fabs(v));
    if (std::fabs(det) < 1e-12 * std::max(1.0, scale * scale * scale))
        throw std::runtime_error("gamma_v_apply: A - mu C singular, outside the contraction regime");
    auto detsub = [&](int col) {
        std::array<double, 9> N = M;
        N[col] = b[0];
        N[col + 3] = b[1];
        N[col + 6] = b[2];
        return N[0] * (N[4] * N[8] - N[5] * N[7]) - N[1] * (N[3] * N[8] - N[5] * N[6]) +
               N[2] * (N[3] * N[7] - N[4] * N[6]);
    };
    return {detsub(0) / det, detsub(1) / det, detsub(2) / det};
}

} // namespace

ExtendedMap4D::ExtendedMap4D(ZMapCoeffs k, FieldSeries2D a1_, double h_, bool with_remainders_)
    : coeffs(std::move(k)), a1(std::move(a1_)), h(h_), with_remainders(with_remainders_) {
    if (!(h > 0.0 && h < 0.5)) throw std::invalid_argument("ExtendedMap4D: h outside (0, 0.5)");
    if (!coeffs.z_mod_one)
        throw std::invalid_argument("ExtendedMap4D: z-mod-one coefficients required");
    gamma = coeffs.gamma_int();
    require_positive_on_grid(a1, "ExtendedMap4D.a1");
}

void ExtendedMap4D::apply(double y, const std::array<double, 3>& x, double& y_out,
                          std::array<double, 3>& x_out) const {
    const double z = x[0], r = x[1], phi = x[2];
    const double Om = coeffs.Omega.value(r, phi);
    const double b = coeffs.b0.value(r, phi);
    const double cc = coeffs.c.value(r, phi);
    const double w = ylny(y);
    double ez = 0.0, er = 0.0, ep = 0.0;
    if (with_remainders && y > 0.0) {
        ez = coeffs.eps_z * w * coeffs.rho_z.value(r, phi);
        er = coeffs.eps_r * y * coeffs.rho_r.value(r, phi);
        ep = coeffs.eps_phi * w * coeffs.rho_phi.value(r, phi);
    }
    y_out = y > 0.0 ? h * std::pow(a1.value(r, phi) * y / h, gamma) : 0.0;
    x_out[0] = wrap_unit(Om + gamma * z + ez);
    x_out[1] = clamp01(b + er);
    x_out[2] = wrap_unit(cc + z + ep);
}

ZState ExtendedMap4D::truncated(const ZState& s) const {
    double yo;
    std::array<double, 3> xo;
    apply(0.0, {s.z, s.r, s.phi}, yo, xo);
    return ZState{xo[0], xo[1], xo[2]};
}

JacobianBlocks jacobian_blocks(const ExtendedMap4D& map, const std::array<double, 3>& x, double y,
                               double det_floor) {
    if (!(y > 0.0)) throw std::domain_error("jacobian_blocks: y must be positive");
    const double z = x[0], r = x[1], phi = x[2];
    const auto& k = map.coeffs;
    (void)z;

    double Or, Op, br, bp, cr, cp;
    k.Omega.partials(r, phi, Or, Op);
    k.b0.partials(r, phi, br, bp);
    k.c.partials(r, phi, cr, cp);

    JacobianBlocks out;
    const double lny = std::log(y);
    const double w = y * lny;
    double rzr = 0, rzp = 0, rrr = 0, rrp = 0, rpr = 0, rpp = 0;
    double rho_z = 0, rho_r = 0, rho_p = 0;
    if (map.with_remainders) {
        k.rho_z.partials(r, phi, rzr, rzp);
        k.rho_r.partials(r, phi, rrr, rrp);
        k.rho_phi.partials(r, phi, rpr, rpp);
        rho_z = k.rho_z.value(r, phi);
        rho_r = k.rho_r.value(r, phi);
        rho_p = k.rho_phi.value(r, phi);
    }
    const double ez = map.with_remainders ? k.eps_z : 0.0;
    const double er = map.with_remainders ? k.eps_r : 0.0;
    const double ep = map.with_remainders ? k.eps_phi : 0.0;

    out.A = {static_cast<double>(map.gamma),
             Or + ez * w * rzr,
             Op + ez * w * rzp,
             0.0,
             br + er * y * rrr,
             bp + er * y * rrp,
             1.0,
             cr + ep * w * rpr,
             cp + ep * w * rpp};
    out.B = {ez * (lny + 1.0) * rho_z, er * rho_r, ep * (lny + 1.0) * rho_p};

    const double a1v = map.a1.value(r, phi);
    double a1r, a1p;
    map.a1.partials(r, phi, a1r, a1p);
    const double G = map.h * std::pow(a1v * y / map.h, map.gamma);
    out.C = {0.0, map.gamma * G / a1v * a1r, map.gamma * G / a1v * a1p};
    out.D = map.gamma * G / y;

    out.det_A = out.A[0] * (out.A[4] * out.A[8] - out.A[5] * out.A[7]) -
                out.A[1] * (out.A[3] * out.A[8] - out.A[5] * out.A[6]) +
                out.A[2] * (out.A[3] * out.A[7] - out.A[4] * out.A[6]);
    if (std::fabs(out.det_A) < det_floor)
        throw std::runtime_error("jacobian_blocks: |det dF/dx| = " + std::to_string(out.det_A) +
                                 " below the floor; foliation hypothesis fails for this model");
    return out;
}

HyperplaneFieldGrid::HyperplaneFieldGrid(const GridSpec& spec) : spec_(spec) {
    if (spec.nz < 2 || spec.nr < 2 || spec.nphi < 2)
        throw std::invalid_argument("HyperplaneFieldGrid: grid too small");
    if (!(spec.y_min > 0.0 && spec.y_min < spec.y0 && spec.y0 < 1.0))
        throw std::invalid_argument("HyperplaneFieldGrid: need 0 < y_min < y0 < 1");
    double y = spec.y0;
    while (y > spec.y_min * 0.999) {
        y_levels_.push_back(y);
        y *= 0.5;
    }
    mu_.assign(y_levels_.size() * spec.nz * spec.nr * spec.nphi * 3, 0.0);
}

std::array<double, 3> HyperplaneFieldGrid::node_x(int iz, int ir, int ip) const {
    return {static_cast<double>(iz) / spec_.nz, static_cast<double>(ir) / (spec_.nr - 1),
            static_cast<double>(ip) / spec_.nphi};
}

std::array<double, 3> HyperplaneFieldGrid::interp(const std::array<double, 3>& x, double y) const {
    if (!(y > 0.0)) return {0.0, 0.0, 0.0};

    // level bracket in ln y
    const int K = levels() - 1;
    int k0, k1;
    double t;
    double scale = 1.0;
    if (y >= y_levels_[0]) {
        k0 = k1 = 0;
        t = 0.0;
    } else if (y <= y_levels_[K]) {
        k0 = k1 = K;
        t = 0.0;
        scale = std::log(y) / std::log(y_levels_[K]); // ln-proportional tail
    } else {
        const double pos = std::log2(y_levels_[0] / y); // in (0, K)
        k0 = static_cast<int>(pos);
        if (k0 >= K) k0 = K - 1;
        k1 = k0 + 1;
        t = pos - k0;
    }

    // x weights: z and phi periodic, r clamped
    const double zf = wrap_unit(x[0]) * spec_.nz;
    const int iz0 = static_cast<int>(zf) % spec_.nz;
    const int iz1 = (iz0 + 1) % spec_.nz;
    const double tz = zf - std::floor(zf);

    double rf = x[1];
    rf = rf < 0.0 ? 0.0 : (rf > 1.0 ? 1.0 : rf);
    rf *= (spec_.nr - 1);
    int ir0 = static_cast<int>(rf);
    if (ir0 >= spec_.nr - 1) ir0 = spec_.nr - 2;
    const int ir1 = ir0 + 1;
    const double tr = rf - ir0;

    const double pf = wrap_unit(x[2]) * spec_.nphi;
    const int ip0 = static_cast<int>(pf) % spec_.nphi;
    const int ip1 = (ip0 + 1) % spec_.nphi;
    const double tp = pf - std::floor(pf);

    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (int lv = 0; lv < (k0 == k1 ? 1 : 2); ++lv) {
        const int k = lv == 0 ? k0 : k1;
        const double wk = (k0 == k1) ? 1.0 : (lv == 0 ? 1.0 - t : t);
        for (int c = 0; c < 3; ++c) {
            const double v00 = (1 - tz) * at(k, iz0, ir0, ip0, c) + tz * at(k, iz1, ir0, ip0, c);
            const double v10 = (1 - tz) * at(k, iz0, ir1, ip0, c) + tz * at(k, iz1, ir1, ip0, c);
            const double v01 = (1 - tz) * at(k, iz0, ir0, ip1, c) + tz * at(k, iz1, ir0, ip1, c);
            const double v11 = (1 - tz) * at(k, iz0, ir1, ip1, c) + tz * at(k, iz1, ir1, ip1, c);
            const double v0 = (1 - tr) * v00 + tr * v10;
            const double v1 = (1 - tr) * v01 + tr * v11;
            out[c] += wk * ((1 - tp) * v0 + tp * v1);
        }
    }
    if (scale != 1.0)
        for (double& v : out) v *= scale;
    return out;
}

double HyperplaneFieldGrid::weighted_distance(const HyperplaneFieldGrid& a,
                                              const HyperplaneFieldGrid& b) {
    double worst = 0.0;
    for (int k = 0; k < a.levels(); ++k) {
        const double wln = std::fabs(std::log(a.y_levels_[k]));
        for (int iz = 0; iz < a.spec_.nz; ++iz)
            for (int ir = 0; ir < a.spec_.nr; ++ir)
                for (int ip = 0; ip < a.spec_.nphi; ++ip) {
                    double d2 = 0.0;
                    for (int c = 0; c < 3; ++c) {
                        const double d = a.at(k, iz, ir, ip, c) - b.at(k, iz, ir, ip, c);
                        d2 += d * d;
                    }
                    worst = std::max(worst, std::sqrt(d2) / wln);
                }
    }
    return worst;
}

double HyperplaneFieldGrid::weighted_norm() const {
    double worst = 0.0;
    for (int k = 0; k < levels(); ++k) {
        const double wln = std::fabs(std::log(y_levels_[k]));
        for (int iz = 0; iz < spec_.nz; ++iz)
            for (int ir = 0; ir < spec_.nr; ++ir)
                for (int ip = 0; ip < spec_.nphi; ++ip) {
                    double d2 = 0.0;
                    for (int c = 0; c < 3; ++c) {
                        const double d = at(k, iz, ir, ip, c);
                        d2 += d * d;
                    }
                    worst = std::max(worst, std::sqrt(d2) / wln);
                }
    }
    return worst;
}

std::array<double, 3> gamma_v_apply(const HyperplaneFieldGrid& mu, const ExtendedMap4D& map,
                                    const std::array<double, 3>& x, double y, double det_floor) {
    const JacobianBlocks blk = jacobian_blocks(map, x, y, det_floor);
    double y1;
    std::array<double, 3> x1;
    map.apply(y, x, y1, x1);
    const std::array<double, 3> mubar = mu.interp(x1, y1);

    std::array<double, 9> M = blk.A;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) M[i * 3 + j] -= mubar[i] * blk.C[j];
    std::array<double, 3> rhs;
    for (int i = 0; i < 3; ++i) rhs[i] = mubar[i] * blk.D - blk.B[i];
    return solve3(M, rhs);
}

FoliationResult fixed_point_field(const ExtendedMap4D& map, const GridSpec& spec, double tol,
                                  int max_sweeps, double det_floor) {
    HyperplaneFieldGrid mu(spec);
    HyperplaneFieldGrid next(spec);
    const int K = mu.levels();

    // cache blocks and image points; also the sup bounds and the hypothesis check
    struct NodeCache {
        std::array<double, 9> M0; // A
        std::array<double, 3> B, C;
        double D;
        std::array<double, 3> x1;
        double y1;
    };
    std::vector<NodeCache> cache(static_cast<size_t>(K) * spec.nz * spec.nr * spec.nphi);
    FoliationBounds bounds;
    size_t idx = 0;
    for (int k = 0; k < K; ++k) {
        const double y = mu.level_y(k);
        const double lny = std::fabs(std::log(y));
        for (int iz = 0; iz < spec.nz; ++iz)
            for (int ir = 0; ir < spec.nr; ++ir)
                for (int ip = 0; ip < spec.nphi; ++ip, ++idx) {
                    const auto x = mu.node_x(iz, ir, ip);
                    const JacobianBlocks blk = jacobian_blocks(map, x, y, det_floor);
                    NodeCache& nc = cache[idx];
                    nc.M0 = blk.A;
                    nc.B = blk.B;
                    nc.C = blk.C;
                    nc.D = blk.D;
                    map.apply(y, x, nc.y1, nc.x1);

                    bounds.A3 = std::max(bounds.A3, inverse_norm(blk.A));
                    const double bn =
                        std::sqrt(blk.B[0] * blk.B[0] + blk.B[1] * blk.B[1] + blk.B[2] * blk.B[2]);
                    bounds.B2 = std::max(bounds.B2, bn / lny);
                    const double cn =
                        std::sqrt(blk.C[0] * blk.C[0] + blk.C[1] * blk.C[1] + blk.C[2] * blk.C[2]);
                    bounds.C2 = std::max(bounds.C2, cn / (std::pow(y, map.gamma) * lny));
                    bounds.D2 = std::max(bounds.D2, std::fabs(blk.D) / std::pow(y, map.gamma - 1));
                }
    }

    // printed contraction estimate per level -> y_star
    bounds.y_star = 0.0;
    for (int k = 0; k < K; ++k) {
        const double y = mu.level_y(k);
        const double lny = std::fabs(std::log(y));
        const double M = 4.0 * bounds.A3 * bounds.B2 * lny;
        const double denom = 1.0 / bounds.A3 - M * bounds.C2 * std::pow(y, map.gamma) * lny;
        if (denom <= 0.0) continue;
        const double lip = (bounds.D2 * std::pow(y, map.gamma - 1) +
                            (bounds.C2 * std::pow(y, map.gamma) * lny / denom) *
                                (M * bounds.D2 * std::pow(y, map.gamma - 1) + bounds.B2 * lny)) /
                           denom;
        if (lip < 1.0) {
            bounds.y_star = y;
            break; // levels are ordered from the largest y down
        }
    }

    FoliationResult res;
    double prev_d = -1.0;
    int non_contracting = 0;
    std::vector<double> ratios;
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        idx = 0;
        double worst_d = 0.0;
        int worst_level = 0;
        for (int k = 0; k < K; ++k) {
            const double wln = std::fabs(std::log(mu.level_y(k)));
            for (int iz = 0; iz < spec.nz; ++iz)
                for (int ir = 0; ir < spec.nr; ++ir)
                    for (int ip = 0; ip < spec.nphi; ++ip, ++idx) {
                        const NodeCache& nc = cache[idx];
                        const auto mubar = mu.interp(nc.x1, nc.y1);
                        std::array<double, 9> M = nc.M0;
                        for (int i = 0; i < 3; ++i)
                            for (int j = 0; j < 3; ++j) M[i * 3 + j] -= mubar[i] * nc.C[j];
                        std::array<double, 3> rhs;
                        for (int i = 0; i < 3; ++i) rhs[i] = mubar[i] * nc.D - nc.B[i];
                        const auto v = solve3(M, rhs);
                        double d2 = 0.0;
                        for (int c = 0; c < 3; ++c) {
                            const double dd = v[c] - mu.at(k, iz, ir, ip, c);
                            d2 += dd * dd;
                            next.at(k, iz, ir, ip, c) = v[c];
                        }
                        const double wd = std::sqrt(d2) / wln;
                        if (wd > worst_d) {
                            worst_d = wd;
                            worst_level = k;
                        }
                    }
        }
        mu.swap_data(next);
        res.sweeps = sweep;
        res.residual = worst_d;
        if (prev_d > 0.0 && worst_d > 0.0) {
            const double ratio = worst_d / prev_d;
            ratios.push_back(ratio);
            non_contracting = ratio >= 1.0 ? non_contracting + 1 : 0;
            if (non_contracting >= 5)
                throw std::runtime_error(
                    "fixed_point_field: no contraction after 5 sweeps (worst level y = " +
                    std::to_string(mu.level_y(worst_level)) + "); shrink y0");
        }
        prev_d = worst_d;
        if (worst_d < tol) break;
    }
    if (res.residual >= tol)
        throw std::runtime_error("fixed_point_field: not converged within the sweep budget");

    double q = 0.0;
    for (size_t i = ratios.size() >= 5 ? ratios.size() - 5 : 0; i < ratios.size(); ++i)
        q = std::max(q, ratios[i]);
    bounds.q = q;
    bounds.ball_norm = mu.weighted_norm();
    bounds.ball_bound = 4.0 * bounds.A3 * bounds.B2;
    res.ball_ok = bounds.ball_norm <= bounds.ball_bound * 1.1;
    res.bounds = bounds;
    res.mu0 = std::move(mu);
    return res;
}

LeafCurve integrate_leaf(const HyperplaneFieldGrid& mu, const std::array<double, 3>& x0, double y0,
                         double rel_tol) {
    if (!(y0 > 0.0 && y0 <= mu.level_y(0) * (1.0 + 1e-12)))
        throw std::invalid_argument("integrate_leaf: start outside the grid's y range");
    const double s0 = -1.0 / std::log(y0);

    // integrate in sigma = s0 - s from 0 to s0; the field vanishes as s -> 0
    auto rhs = [&](double sigma, const double* x, double* dx) {
        const double s = s0 - sigma;
        if (s <= 1e-4) { // y = e^{-1/s} < 1e-4343, indistinguishable from 0
            dx[0] = dx[1] = dx[2] = 0.0;
            return;
        }
        const double y = std::exp(-1.0 / s);
        const auto m = mu.interp({x[0], x[1], x[2]}, y);
        const double f = y / (s * s);
        dx[0] = -m[0] * f;
        dx[1] = -m[1] * f;
        dx[2] = -m[2] * f;
    };

    IntegratorConfig cfg;
    cfg.rel_tol = rel_tol;
    cfg.abs_tol = rel_tol * 1e-2;
    cfg.max_time = s0;

    EventSpec exit_lo{"r_low", [](double, const double* x) { return x[1] + 1e-9; }, -1, 1e-12, true};
    EventSpec exit_hi{"r_high", [](double, const double* x) { return 1.0 + 1e-9 - x[1]; }, -1,
                      1e-12, true};

    const double start[3] = {x0[0], x0[1], x0[2]};
    OrbitRecord rec = integrate(rhs, 3, start, cfg, {exit_lo, exit_hi});

    LeafCurve leaf;
    leaf.exited = !rec.events.empty();
    for (size_t i = 0; i < rec.times.size(); ++i) {
        const double s = s0 - rec.times[i];
        const double y = s > 1e-4 ? std::exp(-1.0 / s) : 0.0;
        leaf.samples.push_back({y, rec.state_at(i)[0], rec.state_at(i)[1], rec.state_at(i)[2]});
    }
    const double* last = rec.state_at(rec.times.size() - 1);
    leaf.endpoint = {wrap_unit(last[0]), clamp01(last[1]), wrap_unit(last[2])};
    return leaf;
}

CorrespondenceReport leaf_correspondence_check(const ExtendedMap4D& map,
                                               const HyperplaneFieldGrid& mu0,
                                               const std::vector<std::array<double, 4>>& starts,
                                               int n) {
    CorrespondenceReport rep;
    rep.step_gap.assign(n, 0.0);
    rep.step_drive.assign(n, 0.0);

    const double tail_y = map.h * std::exp(-5.0);

    for (const auto& st : starts) {
        double y = st[0];
        std::array<double, 3> x{st[1], st[2], st[3]};
        for (int k = 0; k < n; ++k) {
            const auto proj = y > 0.0 ? integrate_leaf(mu0, x, y).endpoint : x;
            const ZState t_of_proj = map.truncated(ZState{proj[0], proj[1], proj[2]});

            double y1;
            std::array<double, 3> x1;
            map.apply(y, x, y1, x1);
            const auto proj1 = y1 > 0.0 ? integrate_leaf(mu0, x1, y1).endpoint : x1;

            const double gap = std::max({circle_dist(proj1[0], t_of_proj.z),
                                         std::fabs(proj1[1] - t_of_proj.r),
                                         circle_dist(proj1[2], t_of_proj.phi)});
            rep.step_gap[k] = std::max(rep.step_gap[k], gap);
            rep.step_drive[k] = std::max(rep.step_drive[k], std::fabs(ylny(y)));
            rep.max_gap = std::max(rep.max_gap, gap);

            if (k >= 1 && y > 0.0 && y1 >= y) rep.v2_decreasing_after_first = false;
            y = y1;
            x = x1;
        }
    }

    for (int k = 0; k < n; ++k)
        if (rep.step_drive[k] > 0.0)
            rep.fitted_const = std::max(rep.fitted_const, rep.step_gap[k] / rep.step_drive[k]);

    double prev = -1.0;
    for (int k = 0; k < n; ++k) {
        if (rep.step_drive[k] > 0.0 && rep.step_drive[k] < tail_y * std::fabs(std::log(tail_y))) {
            if (prev >= 0.0 && rep.step_gap[k] > prev * 1.001 + 1e-15)
                rep.gap_decreasing_tail = false;
            prev = rep.step_gap[k];
        }
    }
    return rep;
}

} // namespace chanlab
