#pragma once

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "chanlab/rsp.hpp"

namespace chanlab {

// Adaptive Dormand-Prince 5(4) with cubic-Hermite dense output, endpoint
// sign-change event detection refined by bisection on the dense output.
// Non-rigorous: local error control only.

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = std::numeric_limits<double>::infinity();
    double max_time = 100.0;
    long max_steps = 20'000'000;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw std::invalid_argument("tolerances must be > 0");
        if (!(max_time > 0.0)) throw std::invalid_argument("max_time must be > 0");
    }
};

struct EventSpec {
    std::string id;
    std::function<double(double, const double*)> fn;
    int direction = 0; // +1 rising, -1 falling, 0 both
    double time_tol = 1e-10;
    bool terminal = false;
};

struct OrbitEvent {
    double t;
    std::string id;
    std::vector<double> state;
};

struct OrbitRecord {
    int dim = 0;
    std::vector<double> times;   // strictly increasing step endpoints
    std::vector<double> states;  // times.size() * dim
    std::vector<double> derivs;  // same layout; enables Hermite evaluation
    std::vector<OrbitEvent> events;
    bool truncated = false;   // step budget exhausted
    bool failed = false;      // non-finite right-hand side
    std::string message;

    double t_begin() const { return times.front(); }
    double t_end() const { return times.back(); }

    const double* state_at(size_t i) const { return &states[i * dim]; }

    /// dense evaluation by cubic Hermite on the covering step
    void eval(double t, double* out) const {
        if (times.size() == 1 || t <= times.front()) {
            std::memcpy(out, states.data(), sizeof(double) * dim);
            return;
        }
        if (t >= times.back()) {
            std::memcpy(out, &states[(times.size() - 1) * dim], sizeof(double) * dim);
            return;
        }
        const auto it = std::upper_bound(times.begin(), times.end(), t);
        const size_t i1 = static_cast<size_t>(it - times.begin());
        const size_t i0 = i1 - 1;
        hermite(i0, i1, t, out);
    }

    void hermite(size_t i0, size_t i1, double t, double* out) const {
        const double t0 = times[i0], t1 = times[i1], h = t1 - t0;
        const double s = (t - t0) / h;
        const double s2 = s * s, s3 = s2 * s;
        const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
        const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
        const double* y0 = &states[i0 * dim];
        const double* y1 = &states[i1 * dim];
        const double* f0 = &derivs[i0 * dim];
        const double* f1 = &derivs[i1 * dim];
        for (int d = 0; d < dim; ++d)
            out[d] = h00 * y0[d] + h * h10 * f0[d] + h01 * y1[d] + h * h11 * f1[d];
    }

    std::vector<std::string> event_ids; // registered specs, for usage checks
};

namespace detail {

// Dormand-Prince coefficients
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

} // namespace detail

/// One embedded 5(4) step; returns the scaled error norm. FSAL: f0 in, f1 out.
template <class RHS>
double dopri5_step(RHS&& rhs, int n, double t, const double* y, const double* f0, double h,
                   double* y1, double* f1, double rel, double absa, double* work) {
    using namespace detail;
    double* k2 = work;
    double* k3 = work + n;
    double* k4 = work + 2 * n;
    double* k5 = work + 3 * n;
    double* k6 = work + 4 * n;
    double* tmp = work + 5 * n;

    for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * f0[i];
    rhs(t + c2 * h, tmp, k2);
    for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * f0[i] + a32 * k2[i]);
    rhs(t + c3 * h, tmp, k3);
    for (int i = 0; i < n; ++i) tmp[i] = y[i] + h * (a41 * f0[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(t + c4 * h, tmp, k4);
    for (int i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a51 * f0[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(t + c5 * h, tmp, k5);
    for (int i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a61 * f0[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(t + h, tmp, k6);
    for (int i = 0; i < n; ++i)
        y1[i] = y[i] + h * (b1 * f0[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    rhs(t + h, y1, f1);

    double err = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ei = h * (e1 * f0[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                               e7 * f1[i]);
        const double sc = absa + rel * std::max(std::fabs(y[i]), std::fabs(y1[i]));
        const double q = ei / sc;
        err += q * q;
    }
    return std::sqrt(err / n);
}

template <class RHS>
double initial_step(RHS&& rhs, int n, double t0, const double* y0, const double* f0, double rel,
                    double absa, double max_step) {
    double dn = 0.0, yn = 0.0;
    for (int i = 0; i < n; ++i) {
        const double sc = absa + rel * std::fabs(y0[i]);
        dn += (f0[i] / sc) * (f0[i] / sc);
        yn += (y0[i] / sc) * (y0[i] / sc);
    }
    dn = std::sqrt(dn / n);
    yn = std::sqrt(yn / n);
    double h = (dn < 1e-10 || yn < 1e-10) ? 1e-6 : 0.01 * yn / dn;
    std::vector<double> y1(n), f1(n);
    for (int i = 0; i < n; ++i) y1[i] = y0[i] + h * f0[i];
    rhs(t0 + h, y1.data(), f1.data());
    double d2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double sc = absa + rel * std::fabs(y0[i]);
        const double q = (f1[i] - f0[i]) / sc;
        d2 += q * q;
    }
    d2 = std::sqrt(d2 / n) / h;
    const double dmax = std::max(dn, d2);
    double h1 = (dmax <= 1e-15) ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / dmax, 0.2);
    return std::min({100.0 * h, h1, max_step});
}

template <class RHS>
OrbitRecord integrate(RHS&& rhs, int n, const double* start, const IntegratorConfig& cfg,
                      const std::vector<EventSpec>& events = {}) {
    cfg.validate();
    OrbitRecord rec;
    rec.dim = n;
    for (const auto& es : events) rec.event_ids.push_back(es.id);
    std::vector<double> y(start, start + n), f(n), y1(n), f1(n), work(6 * n), ev(n);

    double t = 0.0;
    rhs(t, y.data(), f.data());
    for (int i = 0; i < n; ++i)
        if (!std::isfinite(f[i])) {
            rec.failed = true;
            rec.message = "non-finite field at start";
            rec.times.push_back(t);
            rec.states.insert(rec.states.end(), y.begin(), y.end());
            rec.derivs.assign(n, 0.0);
            return rec;
        }

    rec.times.push_back(t);
    rec.states.insert(rec.states.end(), y.begin(), y.end());
    rec.derivs.insert(rec.derivs.end(), f.begin(), f.end());

    std::vector<double> g_prev(events.size());
    for (size_t e = 0; e < events.size(); ++e) g_prev[e] = events[e].fn(t, y.data());

    double h = initial_step(rhs, n, t, y.data(), f.data(), cfg.rel_tol, cfg.abs_tol, cfg.max_step);
    h = std::min(h, cfg.max_time);
    long steps = 0;

    while (t < cfg.max_time) {
        if (steps++ >= cfg.max_steps) {
            rec.truncated = true;
            rec.message = "step budget exhausted";
            return rec;
        }
        h = std::min(h, cfg.max_time - t);
        const double err = dopri5_step(rhs, n, t, y.data(), f.data(), h, y1.data(), f1.data(),
                                       cfg.rel_tol, cfg.abs_tol, work.data());
        bool finite = std::isfinite(err);
        for (int i = 0; finite && i < n; ++i) finite = std::isfinite(y1[i]) && std::isfinite(f1[i]);
        if (!finite) {
            h *= 0.25;
            if (h < 1e-14 * std::max(1.0, std::fabs(t))) {
                rec.failed = true;
                rec.message = "non-finite field; last valid state kept";
                return rec;
            }
            continue;
        }
        if (err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
            continue;
        }

        const double t1 = t + h;
        rec.times.push_back(t1);
        rec.states.insert(rec.states.end(), y1.begin(), y1.end());
        rec.derivs.insert(rec.derivs.end(), f1.begin(), f1.end());
        const size_t i0 = rec.times.size() - 2, i1 = rec.times.size() - 1;

        // endpoint sign-change detection, bisection on the dense output
        double t_terminal = std::numeric_limits<double>::infinity();
        for (size_t e = 0; e < events.size(); ++e) {
            const auto& es = events[e];
            const double g0 = g_prev[e];
            const double g1 = es.fn(t1, y1.data());
            g_prev[e] = g1;
            const bool rising = g0 < 0.0 && g1 >= 0.0;
            const bool falling = g0 > 0.0 && g1 <= 0.0;
            bool hit = (es.direction > 0) ? rising : (es.direction < 0) ? falling
                                                                        : (rising || falling);
            if (!hit || g0 == 0.0) continue;
            double lo = t, hi = t1;
            double glo = g0;
            for (int it = 0; it < 80 && (hi - lo) > es.time_tol; ++it) {
                const double mid = 0.5 * (lo + hi);
                rec.hermite(i0, i1, mid, ev.data());
                const double gm = es.fn(mid, ev.data());
                if ((glo < 0.0) == (gm < 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            const double te = 0.5 * (lo + hi);
            rec.hermite(i0, i1, te, ev.data());
            rec.events.push_back(OrbitEvent{te, es.id, ev});
            if (es.terminal) t_terminal = std::min(t_terminal, te);
        }
        if (std::isfinite(t_terminal)) {
            // truncate the record at the terminal event
            std::vector<double> ye(n), fe(n);
            rec.hermite(i0, i1, t_terminal, ye.data());
            rhs(t_terminal, ye.data(), fe.data());
            rec.times.back() = t_terminal;
            std::copy(ye.begin(), ye.end(), rec.states.end() - n);
            std::copy(fe.begin(), fe.end(), rec.derivs.end() - n);
            std::sort(rec.events.begin(), rec.events.end(),
                      [](const OrbitEvent& a, const OrbitEvent& b) { return a.t < b.t; });
            rec.events.erase(std::remove_if(rec.events.begin(), rec.events.end(),
                                            [&](const OrbitEvent& e) { return e.t > t_terminal; }),
                             rec.events.end());
            return rec;
        }

        t = t1;
        y.swap(y1);
        f.swap(f1); // FSAL
        h = std::min({h * std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2))),
                      cfg.max_step});
    }
    return rec;
}

/// integrate with a std::function field (convenience overload)
OrbitRecord inline integrate_fn(const std::function<void(double, const double*, double*)>& rhs,
                                int n, const double* start, const IntegratorConfig& cfg,
                                const std::vector<EventSpec>& events = {}) {
    return integrate([&rhs](double t, const double* y, double* dy) { rhs(t, y, dy); }, n, start,
                     cfg, events);
}

/// all logged crossings of one event id, in time order
std::vector<OrbitEvent> inline find_section_crossing(const OrbitRecord& rec,
                                                     const std::string& id) {
    if (std::find(rec.event_ids.begin(), rec.event_ids.end(), id) == rec.event_ids.end())
        throw std::invalid_argument("find_section_crossing: unknown event id '" + id + "'");
    std::vector<OrbitEvent> out;
    for (const auto& e : rec.events)
        if (e.id == id) out.push_back(e);
    return out;
}

// --- periodic orbits on invariant faces ---

struct FaceOrbit {
    Face face;
    OrbitRecord record; // in-face coordinates (x, y)
    double period = 0.0;
    double energy = 0.0;
    double closure_defect = 0.0;
    bool degenerate = false; // seed at the face center
    std::array<double, 2> seed{0.0, 0.0};
};

/// reduced 2-dim face field dx/dt = x(1-x) f(y), dy/dt = y(1-y) g(x)
inline auto reduced_face_rhs(const FaceReducedField& red) {
    return [red](double, const double* v, double* dv) {
        dv[0] = v[0] * (1.0 - v[0]) * red.f(v[1]);
        dv[1] = v[1] * (1.0 - v[1]) * red.g(v[0]);
    };
}

// First return to the ray from the face center through the seed. The section
// event is the signed area against the ray direction; the opposite-ray
// crossing carries the opposite crossing direction and is filtered out.
FaceOrbit periodic_orbit_on_face(const GameParams& params, Face face,
                                 const std::array<double, 2>& seed,
                                 const IntegratorConfig& cfg_in = IntegratorConfig{});

} // namespace chanlab
