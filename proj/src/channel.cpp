#include "chanlab/channel.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "chanlab/rng.hpp"

namespace chanlab {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double simpson_rate(const GameParams& p, const FaceOrbit& orbit, int nodes) {
    // composite Simpson over the dense output; nodes must be even
    if (nodes % 2) ++nodes;
    const double h = orbit.period / nodes;
    double acc = 0.0;
    double state[2];
    for (int i = 0; i <= nodes; ++i) {
        orbit.record.eval(i * h, state);
        const auto v = transverse_rates(p, orbit.face, state[0], state[1]);
        const double w = (i == 0 || i == nodes) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * (v[0] + v[1]);
    }
    return acc * h / 3.0;
}

} // namespace

bool unstable_transverse_is_y(Face face) {
    const FaceDef& d = face_def(face);
    const FaceDef& ds = face_def(successor(face));
    if (d.x_zero == ds.x_zero) return true; // shared x-plane, the y-zero grows
    if (d.y_zero == ds.y_zero) return false;
    throw std::logic_error("faces in the cycle share no zeroed coordinate");
}

double floquet_unstable_exponent(const GameParams& p, const FaceOrbit& orbit) {
    const bool y_grows = unstable_transverse_is_y(orbit.face);
    if (orbit.degenerate) {
        const auto red = face_reduced_field(p, orbit.face);
        const auto v = transverse_rates(p, orbit.face, red.x_star(), red.y_star());
        return y_grows ? v[1] : v[0];
    }
    const int nodes = 2048;
    const double h = orbit.period / nodes;
    double acc = 0.0;
    double state[2];
    for (int i = 0; i <= nodes; ++i) {
        orbit.record.eval(i * h, state);
        const auto v = transverse_rates(p, orbit.face, state[0], state[1]);
        const double w = (i == 0 || i == nodes) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * (y_grows ? v[1] : v[0]);
    }
    return acc * h / 3.0 / orbit.period;
}

RateResult transverse_rate_integral(const GameParams& p, const FaceOrbit& orbit, int quad_nodes) {
    if (orbit.degenerate) {
        const auto red = face_reduced_field(p, orbit.face);
        const auto v = transverse_rates(p, orbit.face, red.x_star(), red.y_star());
        const double period = kTwoPi / omega_lin(red);
        return RateResult{orbit.face, 0.0, period, period * (v[0] + v[1]), 0.0};
    }
    if (orbit.closure_defect > 1e-6)
        throw std::invalid_argument("transverse_rate_integral: orbit is not closed");
    const double coarse = simpson_rate(p, orbit, quad_nodes);
    const double fine = simpson_rate(p, orbit, 2 * quad_nodes);
    return RateResult{orbit.face, std::fabs(orbit.energy), orbit.period, fine,
                      std::fabs(fine - coarse)};
}

std::array<double, 2> seed_from_energy(const GameParams& p, Face face, double energy) {
    if (!(energy >= 0.0))
        throw std::invalid_argument("seed_from_energy: the orbit label must be >= 0");
    const auto red = face_reduced_field(p, face);
    const double xs = red.x_star(), ys = red.y_star();
    if (energy == 0.0) return {xs, ys};
    // |E| is monotone along the ray y = y*, x in [x*, 1)
    double lo = xs, hi = 1.0 - 1e-12;
    if (energy_label(red, hi, ys) < energy)
        throw std::invalid_argument("seed_from_energy: label beyond the face range");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (energy_label(red, mid, ys) < energy)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-14) break;
    }
    return {0.5 * (lo + hi), ys};
}

std::vector<ScatterSample> scattering_map_estimate(const GameParams& p, Face source,
                                                   const std::vector<double>& energies,
                                                   const std::vector<double>& phases,
                                                   const ScatterConfig& cfg) {
    if (!(cfg.delta > 0.0 && cfg.delta <= 1e-2))
        throw std::invalid_argument(
            "scattering_map_estimate: delta must lie in (0, 1e-2]; delta = 0 stays on the "
            "invariant face and never reaches the target");
    if (energies.empty() || phases.empty())
        throw std::invalid_argument("scattering_map_estimate: empty grid");

    const Face target = successor(source);
    const FaceDef& td = face_def(target);
    const bool y_grows = unstable_transverse_is_y(source);
    std::vector<ScatterSample> out;

    for (double energy : energies) {
        const auto seed = seed_from_energy(p, source, energy);
        const FaceOrbit orbit = periodic_orbit_on_face(p, source, seed);
        for (double phase : phases) {
            const double ph = wrap_unit(phase);
            double in_face[2];
            orbit.record.eval(ph * orbit.period, in_face);
            SimplexState s = embed_on_face(source, in_face[0], in_face[1]);
            // assign delta to the unstable zeroed coordinate (may be index 3)
            auto set_coord = [&](bool is_x, int idx, double v) {
                double* c1 = is_x ? &s.x1 : &s.y1;
                double* c2 = is_x ? &s.x2 : &s.y2;
                if (idx == 1)
                    *c1 = v;
                else if (idx == 2)
                    *c2 = v;
                else { // raise the third coordinate by lowering the other two proportionally
                    const double tot = *c1 + *c2;
                    const double f = (1.0 - v) / tot;
                    *c1 *= f;
                    *c2 *= f;
                }
            };
            if (y_grows)
                set_coord(false, face_def(source).y_zero, cfg.delta);
            else
                set_coord(true, face_def(source).x_zero, cfg.delta);

            auto rhs = [&p](double, const double* y, double* dy) {
                const auto v = vector_field(p, SimplexState{y[0], y[1], y[2], y[3]});
                dy[0] = v[0];
                dy[1] = v[1];
                dy[2] = v[2];
                dy[3] = v[3];
            };

            EventSpec arrive;
            arrive.id = "target";
            const int tx = td.x_zero, ty = td.y_zero;
            const double rho = cfg.rho;
            arrive.fn = [tx, ty, rho](double, const double* y) {
                const SimplexState st{y[0], y[1], y[2], y[3]};
                const double zx = tx == 1 ? st.x1 : (tx == 2 ? st.x2 : st.x3());
                const double zy = ty == 1 ? st.y1 : (ty == 2 ? st.y2 : st.y3());
                return std::max(zx, zy) - rho;
            };
            arrive.direction = -1;
            arrive.terminal = true;

            IntegratorConfig icfg;
            icfg.rel_tol = cfg.rel_tol;
            icfg.abs_tol = cfg.abs_tol;
            icfg.max_time = cfg.max_time;

            const double y0[4] = {s.x1, s.x2, s.y1, s.y2};
            const OrbitRecord rec = integrate(rhs, 4, y0, icfg, {arrive});
            const auto hits = find_section_crossing(rec, "target");

            ScatterSample sample{source, energy, ph,    cfg.delta,
                                 target, 0.0,    0.0,   true};
            if (!hits.empty()) {
                const auto& hit = hits.front();
                const SimplexState se = snap_to_faces(
                    SimplexState{hit.state[0], hit.state[1], hit.state[2], hit.state[3]});
                const auto in = face_coordinates(target, se);
                if (in[0] > 0.0 && in[0] < 1.0 && in[1] > 0.0 && in[1] < 1.0) {
                    sample.target_energy =
                        energy_label(face_reduced_field(p, target), in[0], in[1]);
                    sample.flight_time = hit.t;
                    sample.failed = false;
                }
            }
            out.push_back(sample);
        }
    }
    return out;
}

namespace {

/// distance of a state to a face's zero-pair in the max metric
inline double face_distance(const SimplexState& s, const FaceDef& d) {
    const double zx = d.x_zero == 1 ? s.x1 : (d.x_zero == 2 ? s.x2 : s.x3());
    const double zy = d.y_zero == 1 ? s.y1 : (d.y_zero == 2 ? s.y2 : s.y3());
    return std::max(std::fabs(zx), std::fabs(zy));
}

} // namespace

int shadow_visit_count(const GameParams& p, const ShadowParams& sp, Face start,
                       const SimplexState& s0) {
    // lean integration loop; the visit counter needs no event-time accuracy,
    // the indicator is tested at every accepted endpoint and midpoint
    auto rhs = [&p](double, const double* y, double* dy) {
        const auto v = vector_field(p, SimplexState{y[0], y[1], y[2], y[3]});
        dy[0] = v[0];
        dy[1] = v[1];
        dy[2] = v[2];
        dy[3] = v[3];
    };

    Face expected = successor(start);
    int visits = 0;

    double y[4] = {s0.x1, s0.x2, s0.y1, s0.y2};
    double f[4], y1[4], f1[4], work[24], mid[4];
    double t = 0.0, t_progress = 0.0;
    rhs(t, y, f);
    double h = 1e-3;
    long steps = 0;
    const long max_steps = 4'000'000;

    // The channel consists of the faces and their connecting orbits inside
    // the codim-1 subspaces {x_i = 0}, {y_j = 0}; a transit keeps one of the
    // six coordinates near zero while being far from every 2-dim face
    // square. Leaving is therefore measured against the subspace walls.
    auto classify = [&](const double* st) -> int {
        // 1 = entered the expected face's rho-ball, -1 = left the channel
        const SimplexState s{st[0], st[1], st[2], st[3]};
        if (face_distance(s, face_def(expected)) < sp.rho) return 1;
        const double wall = std::min({std::fabs(s.x1), std::fabs(s.x2), std::fabs(s.x3()),
                                      std::fabs(s.y1), std::fabs(s.y2), std::fabs(s.y3())});
        return wall > 2.0 * sp.rho ? -1 : 0;
    };

    while (t < sp.max_time && steps++ < max_steps) {
        if (t - t_progress > sp.transit_time) return visits; // stalled, no next face
        h = std::min(h, sp.max_time - t);
        h = std::min(h, 0.5);
        const double err = dopri5_step(rhs, 4, t, y, f, h, y1, f1, sp.rel_tol, sp.abs_tol, work);
        if (!std::isfinite(err) || err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2));
            if (!std::isfinite(err)) h = 0.25 * h;
            if (h < 1e-14) return visits;
            continue;
        }
        for (int i = 0; i < 4; ++i) mid[i] = 0.5 * (y[i] + y1[i]); // crude midpoint probe
        for (const double* probe : {static_cast<const double*>(mid), static_cast<const double*>(y1)}) {
            const int c = classify(probe);
            if (c == 1) {
                ++visits;
                if (visits >= sp.kmax) return visits;
                expected = successor(expected);
                t_progress = t;
            } else if (c == -1) {
                return visits;
            }
        }
        t += h;
        for (int i = 0; i < 4; ++i) {
            y[i] = y1[i];
            f[i] = f1[i];
        }
        h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(err, 1e-10), -0.2)));
    }
    return visits;
}

std::vector<ShadowGridCell> shadowing_sweep(const ShadowParams& sp) {
    if (sp.n < 1 || sp.kmax < 1) throw std::invalid_argument("shadowing_sweep: n, kmax must be >= 1");
    if (!(sp.delta > 0.0 && sp.delta < sp.rho && sp.rho < 0.5))
        throw std::invalid_argument("shadowing_sweep: need 0 < delta < rho < 0.5");

    std::vector<double> eps;
    for (double e = sp.grid_min; e <= sp.grid_max + 1e-12; e += sp.grid_step) eps.push_back(e);

    struct Cell {
        double ex, ey;
        size_t ix, iy;
    };
    std::vector<Cell> cells;
    for (size_t i = 0; i < eps.size(); ++i)
        for (size_t j = 0; j < eps.size(); ++j) cells.push_back({eps[i], eps[j], i, j});

    std::vector<ShadowGridCell> out(cells.size());
    const FaceDef& sd = face_def(sp.start);

    auto run_cell = [&](size_t ci) {
        const Cell& cell = cells[ci];
        const GameParams p(cell.ex, cell.ey);
        std::vector<int> reached(sp.n, 0);
        for (int s = 0; s < sp.n; ++s) {
            SplitMix64 rng = substream(sp.seed, cell.ix, cell.iy, static_cast<uint64_t>(s));
            const double zx = rng.uniform_open(0.0, sp.delta);
            const double zy = rng.uniform_open(0.0, sp.delta);
            const double xin = rng.uniform_open(sp.rho, 1.0 - sp.rho);
            const double yin = rng.uniform_open(sp.rho, 1.0 - sp.rho);
            SimplexState st = embed_on_face(sp.start, xin, yin);
            // move off the face by the transverse offsets
            auto lift = [&](bool is_x, int idx, double v) {
                double* c1 = is_x ? &st.x1 : &st.y1;
                double* c2 = is_x ? &st.x2 : &st.y2;
                if (idx == 1)
                    *c1 = v;
                else if (idx == 2)
                    *c2 = v;
                else {
                    const double tot = *c1 + *c2;
                    const double fsc = (1.0 - v) / tot;
                    *c1 *= fsc;
                    *c2 *= fsc;
                }
            };
            lift(true, sd.x_zero, zx);
            lift(false, sd.y_zero, zy);
            reached[s] = shadow_visit_count(p, sp, sp.start, st);
        }
        ShadowGridCell& g = out[ci];
        g.eps_x = cell.ex;
        g.eps_y = cell.ey;
        g.n = sp.n;
        g.delta = sp.delta;
        g.rho = sp.rho;
        g.fraction.assign(sp.kmax + 1, 0.0);
        for (int k = 0; k <= sp.kmax; ++k) {
            long cnt = 0;
            for (int s = 0; s < sp.n; ++s)
                if (reached[s] >= k) ++cnt;
            g.fraction[k] = static_cast<double>(cnt) / sp.n;
        }
    };

    int nthreads = sp.threads > 0 ? sp.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
    if (nthreads < 1) nthreads = 1;
    if (nthreads == 1) {
        for (size_t ci = 0; ci < cells.size(); ++ci) run_cell(ci);
    } else {
        std::atomic<size_t> cursor{0};
        std::vector<std::thread> pool;
        for (int tthread = 0; tthread < nthreads; ++tthread)
            pool.emplace_back([&]() {
                for (;;) {
                    const size_t ci = cursor.fetch_add(1);
                    if (ci >= cells.size()) return;
                    run_cell(ci);
                }
            });
        for (auto& th : pool) th.join();
    }
    return out;
}

bool mask_value(const ShadowGridCell& cell, const MaskThreshold& t) {
    const int k = std::min<int>(t.k, static_cast<int>(cell.fraction.size()) - 1);
    return cell.fraction[k] >= t.fraction;
}

} // namespace chanlab
