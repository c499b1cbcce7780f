#include "chanlab/toymap.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace chanlab {

namespace {

FieldSeries1D sum_fields(const FieldSeries1D& a, const FieldSeries1D& b) {
    std::vector<double> c(std::max(a.coeffs().size(), b.coeffs().size()), 0.0);
    for (size_t i = 0; i < a.coeffs().size(); ++i) c[i] += a.coeffs()[i];
    for (size_t i = 0; i < b.coeffs().size(); ++i) c[i] += b.coeffs()[i];
    return FieldSeries1D(c);
}

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

} // namespace

ToyModelSpec::ToyModelSpec(FieldSeries1D p_, FieldSeries1D sigma_, FieldSeries1D omega_,
                           FieldSeries2D p0_, FieldSeries2D sigma0_, FieldSeries2D r0_,
                           FieldSeries2D omega0_, double h_)
    : p(std::move(p_)), sigma(std::move(sigma_)), omega(std::move(omega_)), p0(std::move(p0_)),
      sigma0(std::move(sigma0_)), r0(std::move(r0_)), omega0(std::move(omega0_)), h(h_) {
    require_positive_on_grid(p, "ToyModelSpec.p");
    require_negative_on_grid(sigma, "ToyModelSpec.sigma");
    require_negative_on_grid(sum_fields(p, sigma), "ToyModelSpec.p+sigma");
    if (!(h > 0.0 && h < 0.5)) throw std::invalid_argument("ToyModelSpec: h outside (0, 0.5)");
}

std::function<void(double, const double*, double*)> normal_form_rhs(const ToyModelSpec& m) {
    return [m](double, const double* y, double* dy) {
        const double v1 = y[0], v2 = y[1], r = y[2], phi = y[3];
        const double pr = m.p.value(r), sr = m.sigma.value(r), wr = m.omega.value(r);
        const double v12 = v1 * v2;
        dy[0] = pr * v1 + m.p0.value(r, phi) * v1 * v1 * v2;
        dy[1] = sr * v2 + m.sigma0.value(r, phi) * v1 * v2 * v2;
        dy[2] = v12 * m.r0.value(r, phi);
        dy[3] = wr + v12 * m.omega0.value(r, phi);
    };
}

LocalMapResult local_shilnikov_map(const ToyModelSpec& m, double v1_0, double r, double phi) {
    if (!(v1_0 > 0.0))
        throw std::domain_error("local_shilnikov_map: v1 <= 0, point on or past the stable tube");
    if (!(v1_0 < m.h)) throw std::domain_error("local_shilnikov_map: v1 >= h, not in the local chart");
    const double pr = m.p.value(r);
    const double tau = -std::log(v1_0 / m.h) / pr;
    const double v2 = m.h * std::pow(v1_0 / m.h, -m.sigma.value(r) / pr);
    return LocalMapResult{v2, r, wrap_unit(phi + tau * m.omega.value(r)), tau};
}

GlobalMapSpec::GlobalMapSpec(FieldSeries2D a1_, FieldSeries2D b0_, FieldSeries2D b1_,
                             FieldSeries2D c0_, FieldSeries2D c1_)
    : a1(std::move(a1_)), b0(std::move(b0_)), b1(std::move(b1_)), c0(std::move(c0_)),
      c1(std::move(c1_)) {
    require_positive_on_grid(a1, "GlobalMapSpec.a1");
    require_range_on_grid(b0, 0.0, 1.0, "GlobalMapSpec.b0");
}

GlobalMapResult global_map(const GlobalMapSpec& g, double v2, double r, double phi) {
    const double v1 = g.a1.value(r, phi) * v2;
    const double rn = clamp01(g.b0.value(r, phi) + g.b1.value(r, phi) * v2);
    const double pn = wrap_unit(g.c0.value(r, phi) + g.c1.value(r, phi) * v2);
    return GlobalMapResult{v1, rn, pn};
}

ReturnMapResult composed_return_map(const ToyModelSpec& m, const GlobalMapSpec& g, double v2,
                                    double r, double phi) {
    if (!(v2 > 0.0 && v2 <= m.h * std::exp(-1.0)))
        throw std::domain_error("composed_return_map: v2 outside (0, h/e]");
    const GlobalMapResult gm = global_map(g, v2, r, phi);
    const LocalMapResult lm = local_shilnikov_map(m, gm.v1, gm.r, gm.phi);
    return ReturnMapResult{lm.v2, lm.r, lm.phi, lm.flight_time};
}

void ZMapCoeffs::validate() const {
    if (z_mod_one) (void)gamma_int();
    if (eps_z < 0.0 || eps_r < 0.0 || eps_phi < 0.0)
        throw std::invalid_argument("ZMapCoeffs: remainder amplitudes must be >= 0");
    require_range_on_grid(b0, 0.0, 1.0, "ZMapCoeffs.b0");
}

int ZMapCoeffs::gamma_int() const {
    for (const auto& t : Gamma.terms())
        if (!(t[0] == 0.0 && t[1] == 0.0 && t[2] == 0.0))
            throw std::invalid_argument("ZMapCoeffs: Gamma must be constant in z-mod-one mode");
    const double g = Gamma.value(0.0, 0.0);
    const double gr = std::round(g);
    if (std::fabs(g - gr) > 1e-12 || gr < 2.0)
        throw std::invalid_argument("ZMapCoeffs: Gamma must be an integer >= 2 in z-mod-one mode");
    return static_cast<int>(gr);
}

ZState z_return_map(const ZMapCoeffs& k, const ZState& s) {
    const double Om = k.Omega.value(s.r, s.phi);
    const double Ga = k.Gamma.value(s.r, s.phi);
    const double b = k.b0.value(s.r, s.phi);
    const double cc = k.c.value(s.r, s.phi);
    if (k.mode == ZMapMode::truncated) {
        double zn = Om + Ga * s.z;
        if (k.z_mod_one) zn = wrap_unit(zn);
        return ZState{zn, clamp01(b), wrap_unit(cc + s.z)};
    }
    if (!(s.z < 0.0)) throw std::domain_error("z_return_map: extended mode requires z < 0");
    const double ez = std::exp(s.z);
    const double zn = Om + Ga * s.z + k.eps_z * s.z * ez * k.rho_z.value(s.r, s.phi);
    const double rn = clamp01(b + k.eps_r * ez * k.rho_r.value(s.r, s.phi));
    const double pn = wrap_unit(cc + s.z + k.eps_phi * s.z * ez * k.rho_phi.value(s.r, s.phi));
    return ZState{zn, rn, pn};
}

std::array<double, 9> zmap_jacobian(const ZMapCoeffs& k, const ZState& s) {
    double Or, Op, Gr, Gp, br, bp, cr, cp;
    k.Omega.partials(s.r, s.phi, Or, Op);
    k.Gamma.partials(s.r, s.phi, Gr, Gp);
    k.b0.partials(s.r, s.phi, br, bp);
    k.c.partials(s.r, s.phi, cr, cp);
    const double Ga = k.Gamma.value(s.r, s.phi);
    return {Ga, Or + Gr * s.z, Op + Gp * s.z, 0.0, br, bp, 1.0, cr, cp};
}

// ---- least-squares refit into the series basis ----

namespace {

constexpr int kFitNr = 33;
constexpr int kFitNphi = 64;

// Householder QR least squares for a tall dense system (rows x cols)
std::vector<double> qr_least_squares(std::vector<double> A, std::vector<double> b, int rows,
                                     int cols) {
    for (int j = 0; j < cols; ++j) {
        double norm = 0.0;
        for (int i = j; i < rows; ++i) norm += A[i * cols + j] * A[i * cols + j];
        norm = std::sqrt(norm);
        if (norm == 0.0) continue;
        if (A[j * cols + j] > 0) norm = -norm;
        for (int i = j; i < rows; ++i) A[i * cols + j] /= norm;
        A[j * cols + j] -= 1.0;
        // apply the reflector to the remaining columns and to b
        for (int jj = j + 1; jj < cols; ++jj) {
            double dot = 0.0;
            for (int i = j; i < rows; ++i) dot += A[i * cols + j] * A[i * cols + jj];
            dot /= A[j * cols + j];
            for (int i = j; i < rows; ++i) A[i * cols + jj] += dot * A[i * cols + j];
        }
        double dot = 0.0;
        for (int i = j; i < rows; ++i) dot += A[i * cols + j] * b[i];
        dot /= A[j * cols + j];
        for (int i = j; i < rows; ++i) b[i] += dot * A[i * cols + j];
        A[j * cols + j] = norm; // store R diagonal
    }
    std::vector<double> x(cols, 0.0);
    for (int j = cols - 1; j >= 0; --j) {
        double s = b[j];
        for (int jj = j + 1; jj < cols; ++jj) s -= A[j * cols + jj] * x[jj];
        x[j] = (A[j * cols + j] == 0.0) ? 0.0 : s / A[j * cols + j];
    }
    return x;
}

} // namespace

FieldSeries2D fit_field2d(const std::function<double(double, double)>& f, double* residual) {
    // Chebyshev-distributed r nodes; uniform phi grid gives exact discrete
    // orthogonality of the trig modes up to frequency 8.
    std::array<double, kFitNr> rn{};
    for (int i = 0; i < kFitNr; ++i)
        rn[i] = 0.5 - 0.5 * std::cos(M_PI * (2.0 * i + 1.0) / (2.0 * kFitNr));

    std::vector<double> samples(kFitNr * kFitNphi);
    for (int i = 0; i < kFitNr; ++i)
        for (int j = 0; j < kFitNphi; ++j)
            samples[i * kFitNphi + j] = f(rn[i], static_cast<double>(j) / kFitNphi);

    FieldSeries2D out;
    const int cols = kMaxFieldDegree + 1;
    std::vector<double> V(kFitNr * cols);
    for (int i = 0; i < kFitNr; ++i) {
        double rk = 1.0;
        for (int k = 0; k < cols; ++k) {
            V[i * cols + k] = rk;
            rk *= rn[i];
        }
    }
    for (int m = 0; m <= kMaxFieldDegree; ++m) {
        for (int s = 0; s < (m == 0 ? 1 : 2); ++s) {
            std::vector<double> modal(kFitNr, 0.0);
            for (int i = 0; i < kFitNr; ++i) {
                double acc = 0.0;
                for (int j = 0; j < kFitNphi; ++j) {
                    const double arg = 2.0 * M_PI * m * j / kFitNphi;
                    acc += samples[i * kFitNphi + j] * (s == 0 ? std::cos(arg) : std::sin(arg));
                }
                modal[i] = acc * (m == 0 ? 1.0 : 2.0) / kFitNphi;
            }
            const auto a = qr_least_squares(V, modal, kFitNr, cols);
            for (int k = 0; k < cols; ++k)
                if (a[k] != 0.0) out.set(k, m, s, a[k]);
        }
    }

    if (residual) {
        double worst = 0.0;
        const int cr = 2 * kFitNr + 1, cp = 2 * kFitNphi;
        for (int i = 0; i <= cr; ++i)
            for (int j = 0; j < cp; ++j) {
                const double r = static_cast<double>(i) / cr;
                const double ph = static_cast<double>(j) / cp;
                worst = std::max(worst, std::fabs(f(r, ph) - out.value(r, ph)));
            }
        *residual = worst;
    }
    return out;
}

CoeffsFitResult coeffs_from_model(const ToyModelSpec& m, const GlobalMapSpec& g,
                                  double max_residual) {
    auto gamma_at = [&](double r, double phi) {
        const double b = clamp01(g.b0.value(r, phi));
        return -m.sigma.value(b) / m.p.value(b);
    };
    auto ratio_at = [&](double r, double phi) {
        const double b = clamp01(g.b0.value(r, phi));
        return m.omega.value(b) / m.p.value(b);
    };
    auto lna1_at = [&](double r, double phi) { return std::log(g.a1.value(r, phi)); };

    double res_gamma = 0.0, res_c = 0.0, res_omega = 0.0;
    FieldSeries2D Gamma = fit_field2d(gamma_at, &res_gamma);
    FieldSeries2D c = fit_field2d(
        [&](double r, double phi) { return g.c0.value(r, phi) - ratio_at(r, phi) * lna1_at(r, phi); },
        &res_c);
    FieldSeries2D Omega = fit_field2d(
        [&](double r, double phi) { return -ratio_at(r, phi) * lna1_at(r, phi) * gamma_at(r, phi); },
        &res_omega);

    const double res = std::max({res_gamma, res_c, res_omega});
    if (res > max_residual)
        throw std::runtime_error(
            "coeffs_from_model: composite fields not representable at the current degree caps "
            "(refit residual " +
            std::to_string(res) + ")");

    // shifting c by an integer leaves the mod-1 phase row unchanged
    const double c00 = c.get(0, 0, 0);
    c.set(0, 0, 0, c00 - std::floor(c00));

    ZMapCoeffs k;
    k.Omega = std::move(Omega);
    k.Gamma = std::move(Gamma);
    k.b0 = g.b0;
    k.c = std::move(c);
    k.mode = ZMapMode::truncated;
    k.z_mod_one = false;
    return CoeffsFitResult{std::move(k), res};
}

ZMapFn make_map_fn(const ZMapCoeffs& k) {
    return [k](const ZState& s) { return z_return_map(k, s); };
}

ZMapJacFn make_jacobian_fn(const ZMapCoeffs& k) {
    return [k](const ZState& s) { return zmap_jacobian(k, s); };
}

IterateResult iterate_orbit(const ZMapFn& map, const ZState& start, long n,
                            const std::function<void(long, const ZState&)>& sink) {
    if (n < 1) throw std::invalid_argument("iterate_orbit: n must be >= 1");
    IterateResult res;
    ZState s = start;
    for (long i = 1; i <= n; ++i) {
        s = map(s);
        if (!(s.r >= -1e-12 && s.r <= 1.0 + 1e-12) || !std::isfinite(s.z)) {
            res.escaped = true;
            return res;
        }
        if (sink) sink(i, s);
        res.completed = i;
    }
    return res;
}

LyapunovResult lyapunov_spectrum(const ZMapFn& map, const ZMapJacFn& jac, const ZState& start,
                                 long n, int qr_every, long transient) {
    if (n < 1) throw std::invalid_argument("lyapunov_spectrum: n must be >= 1");
    if (qr_every < 1) qr_every = 1;
    LyapunovResult res;
    ZState s = start;
    for (long i = 0; i < transient; ++i) s = map(s);

    double Q[9] = {1, 0, 0, 0, 1, 0, 0, 0, 1}; // columns are the frame vectors
    double sums[3] = {0, 0, 0};
    bool dead[3] = {false, false, false};
    long applied = 0;

    for (long i = 0; i < n; ++i) {
        const auto J = jac(s);
        double W[9];
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c)
                W[r * 3 + c] = J[r * 3 + 0] * Q[0 * 3 + c] + J[r * 3 + 1] * Q[1 * 3 + c] +
                               J[r * 3 + 2] * Q[2 * 3 + c];
        // modified Gram-Schmidt
        if ((i + 1) % qr_every == 0 || i + 1 == n) {
            for (int c = 0; c < 3; ++c) {
                for (int prev = 0; prev < c; ++prev) {
                    double dot = 0.0;
                    for (int r = 0; r < 3; ++r) dot += W[r * 3 + prev] * W[r * 3 + c];
                    for (int r = 0; r < 3; ++r) W[r * 3 + c] -= dot * W[r * 3 + prev];
                }
                double norm = 0.0;
                for (int r = 0; r < 3; ++r) norm += W[r * 3 + c] * W[r * 3 + c];
                norm = std::sqrt(norm);
                if (norm < 1e-300) {
                    dead[c] = true;
                    // reseed with a canonical direction orthogonal to the live frame
                    for (int r = 0; r < 3; ++r) W[r * 3 + c] = (r == c) ? 1.0 : 0.0;
                    for (int prev = 0; prev < c; ++prev) {
                        double dot = 0.0;
                        for (int r = 0; r < 3; ++r) dot += W[r * 3 + prev] * W[r * 3 + c];
                        for (int r = 0; r < 3; ++r) W[r * 3 + c] -= dot * W[r * 3 + prev];
                    }
                    double n2 = 0.0;
                    for (int r = 0; r < 3; ++r) n2 += W[r * 3 + c] * W[r * 3 + c];
                    n2 = std::sqrt(n2);
                    for (int r = 0; r < 3; ++r) W[r * 3 + c] /= (n2 > 0 ? n2 : 1.0);
                } else {
                    sums[c] += std::log(norm);
                    for (int r = 0; r < 3; ++r) W[r * 3 + c] /= norm;
                }
            }
            std::memcpy(Q, W, sizeof(Q));
            applied = i + 1;
        } else {
            std::memcpy(Q, W, sizeof(Q));
        }
        s = map(s);
        if (!(s.r >= -1e-12 && s.r <= 1.0 + 1e-12) || !std::isfinite(s.z)) {
            res.escaped = true;
            break;
        }
        res.steps = i + 1;
    }
    const long denom = applied > 0 ? applied : 1;
    for (int c = 0; c < 3; ++c)
        res.exponents[c] = dead[c] ? -std::numeric_limits<double>::infinity()
                                   : sums[c] / static_cast<double>(denom);
    std::sort(res.exponents.begin(), res.exponents.end(), std::greater<double>());
    return res;
}

} // namespace chanlab
