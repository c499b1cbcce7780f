#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "chanlab/artifacts.hpp"
#include "chanlab/channel.hpp"
#include "chanlab/cone.hpp"
#include "chanlab/config.hpp"
#include "chanlab/foliation.hpp"
#include "chanlab/henon.hpp"
#include "chanlab/ode.hpp"
#include "chanlab/rng.hpp"
#include "chanlab/rsp.hpp"
#include "chanlab/toymap.hpp"

using namespace chanlab;

namespace {

struct RunContext {
    std::string out_dir = "out";
    uint64_t seed = 0;
    int threads = 0;
    std::string subcommand;
};

// the manifest is itself a loadable run config: `--config manifest.json`
// reproduces the artifacts byte-identically
void write_manifest(const RunContext& ctx, const json& params) {
    json m{{"subcommand", ctx.subcommand},
           {"seed", ctx.seed},
           {"threads", ctx.threads},
           {"out", ctx.out_dir},
           {"version", kVersion},
           {"params", params}};
    atomic_write(ctx.out_dir + "/" + ctx.subcommand + "/manifest.json", m.dump(2) + "\n");
}

std::string sub_path(const RunContext& ctx, const std::string& name) {
    return ctx.out_dir + "/" + ctx.subcommand + "/" + name;
}

// ---- subcommand handlers; params arrive strictly validated ----

void run_rsp_equilibria(const RunContext& ctx, const json& params) {
    const GameParams p(params.at("eps_x").get<double>(), params.at("eps_y").get<double>());
    json out = json::array();
    for (const auto& eq : equilibria(p)) {
        const auto v = vector_field(p, eq.point);
        const double res = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
        out.push_back({{"face", face_name(eq.face)},
                       {"point", {eq.point.x1, eq.point.x2, eq.point.y1, eq.point.y2}},
                       {"in_face", {eq.x_star, eq.y_star}},
                       {"residual", res}});
    }
    const std::string text = out.dump(2) + "\n";
    atomic_write(sub_path(ctx, "equilibria.json"), text);
    write_manifest(ctx, params);
    std::cout << text;
}

void run_rsp_simulate(const RunContext& ctx, const json& params) {
    const GameParams p(params.at("eps_x").get<double>(), params.at("eps_y").get<double>());
    const auto start = params.at("start").get<std::vector<double>>();
    if (start.size() != 4) throw ConfigError("start must have 4 components x1,x2,y1,y2");
    IntegratorConfig cfg;
    cfg.max_time = params.at("t").get<double>();
    if (params.contains("rel_tol")) cfg.rel_tol = params.at("rel_tol").get<double>();
    if (params.contains("abs_tol")) cfg.abs_tol = params.at("abs_tol").get<double>();

    auto rhs = [&p](double, const double* y, double* dy) {
        const auto v = vector_field(p, SimplexState{y[0], y[1], y[2], y[3]});
        for (int i = 0; i < 4; ++i) dy[i] = v[i];
    };
    std::vector<EventSpec> events;
    if (params.contains("face_events")) {
        // optional markers: entry into each face's rho-ball
        const double rho = params.at("face_events").get<double>();
        for (Face f : kAllFaces) {
            const FaceDef& d = face_def(f);
            events.push_back(EventSpec{
                std::string("near_") + face_name(f),
                [d, rho](double, const double* y) {
                    const SimplexState st{y[0], y[1], y[2], y[3]};
                    const double zx = d.x_zero == 1 ? st.x1 : (d.x_zero == 2 ? st.x2 : st.x3());
                    const double zy = d.y_zero == 1 ? st.y1 : (d.y_zero == 2 ? st.y2 : st.y3());
                    return std::max(zx, zy) - rho;
                },
                -1, 1e-10, false});
        }
    }
    const OrbitRecord rec = integrate(rhs, 4, start.data(), cfg, events);

    // node rows and event rows merged in time order; the marker column names
    // the event a row belongs to
    CsvBuilder csv(CsvSchema{{"t", "x1", "x2", "y1", "y2", "event"}});
    size_t ei = 0;
    auto event_row = [&](const OrbitEvent& e) {
        csv.add_row_raw({format_real(e.t), format_real(e.state[0]), format_real(e.state[1]),
                         format_real(e.state[2]), format_real(e.state[3]), e.id});
    };
    std::vector<OrbitEvent> evs = rec.events;
    std::sort(evs.begin(), evs.end(),
              [](const OrbitEvent& a, const OrbitEvent& b) { return a.t < b.t; });
    for (size_t i = 0; i < rec.times.size(); ++i) {
        while (ei < evs.size() && evs[ei].t <= rec.times[i]) event_row(evs[ei++]);
        const double* s = rec.state_at(i);
        csv.add_row_raw({format_real(rec.times[i]), format_real(s[0]), format_real(s[1]),
                         format_real(s[2]), format_real(s[3]), ""});
    }
    while (ei < evs.size()) event_row(evs[ei++]);
    csv.write(sub_path(ctx, "orbit.csv"));
    write_manifest(ctx, params);
}

void run_rates(const RunContext& ctx, const json& params) {
    const GameParams p(params.at("eps_x").get<double>(), params.at("eps_y").get<double>());
    const double energy = params.at("energy").get<double>();
    const std::string face_tag = params.at("face").get<std::string>();

    std::vector<Face> faces;
    if (face_tag == "all")
        faces.assign(kAllFaces.begin(), kAllFaces.end());
    else
        faces.push_back(face_from_name(face_tag));

    json out = json::array();
    double sum = 0.0;
    for (Face f : faces) {
        const auto seed = seed_from_energy(p, f, energy);
        const FaceOrbit orbit = periodic_orbit_on_face(p, f, seed);
        const RateResult r = transverse_rate_integral(p, orbit);
        sum += r.rate;
        out.push_back({{"face", face_name(f)},
                       {"energy", r.energy},
                       {"period", r.period},
                       {"rate", r.rate},
                       {"quad_delta", r.quad_delta}});
    }
    json doc{{"results", out}};
    if (faces.size() > 1) doc["rate_sum"] = sum; // reported as data, not asserted
    const std::string text = doc.dump(2) + "\n";
    atomic_write(sub_path(ctx, "rates.json"), text);
    write_manifest(ctx, params);
    std::cout << text;
}

void run_scatter(const RunContext& ctx, const json& params) {
    const GameParams p(params.at("eps_x").get<double>(), params.at("eps_y").get<double>());
    const Face source = face_from_name(params.at("face").get<std::string>());
    ScatterConfig cfg;
    cfg.delta = params.at("delta").get<double>();
    if (params.contains("rho")) cfg.rho = params.at("rho").get<double>();
    if (params.contains("max_time")) cfg.max_time = params.at("max_time").get<double>();
    const auto energies = params.at("energies").get<std::vector<double>>();
    const auto phases = params.at("phases").get<std::vector<double>>();

    const auto samples = scattering_map_estimate(p, source, energies, phases, cfg);
    CsvBuilder csv(CsvSchema{{"energy", "phase", "target_energy", "flight_time", "failed"}});
    std::vector<std::pair<double, double>> pts;
    for (const auto& s : samples) {
        csv.add_row_raw({format_real(s.source_energy), format_real(s.phase),
                         format_real(s.target_energy), format_real(s.flight_time),
                         s.failed ? "1" : "0"});
        if (!s.failed) pts.push_back({s.phase, s.target_energy});
    }
    csv.write(sub_path(ctx, "scatter.csv"));
    if (params.contains("svg") && params.at("svg").get<bool>()) {
        double lo = 0.0, hi = 1.0;
        for (const auto& q : pts) {
            lo = std::min(lo, q.second);
            hi = std::max(hi, q.second);
        }
        atomic_write(sub_path(ctx, "scatter.svg"),
                     render_svg_scatter(pts, SvgAxes{0.0, 1.0, lo, hi + 1e-12, "phase",
                                                     "target energy"}));
    }
    write_manifest(ctx, params);
}

void run_shadow(const RunContext& ctx, const json& params) {
    ShadowParams sp;
    sp.seed = ctx.seed;
    sp.threads = ctx.threads;
    if (params.contains("grid_min")) sp.grid_min = params.at("grid_min").get<double>();
    if (params.contains("grid_max")) sp.grid_max = params.at("grid_max").get<double>();
    if (params.contains("grid_step")) sp.grid_step = params.at("grid_step").get<double>();
    if (params.contains("n")) sp.n = params.at("n").get<int>();
    if (params.contains("delta")) sp.delta = params.at("delta").get<double>();
    if (params.contains("rho")) sp.rho = params.at("rho").get<double>();
    if (params.contains("kmax")) sp.kmax = params.at("kmax").get<int>();
    if (params.contains("start")) sp.start = face_from_name(params.at("start").get<std::string>());
    if (params.contains("max_time")) sp.max_time = params.at("max_time").get<double>();

    const auto cells = shadowing_sweep(sp);
    CsvBuilder csv(CsvSchema{{"eps_x", "eps_y", "k", "fraction"}});
    for (const auto& c : cells)
        for (int k = 0; k <= sp.kmax; ++k)
            csv.add_row({c.eps_x, c.eps_y, static_cast<double>(k), c.fraction[k]});
    csv.write(sub_path(ctx, "fractions.csv"));

    CsvBuilder masks(CsvSchema{
        {"eps_x", "eps_y", "mask_1pct_60", "mask_1pct_12", "mask_10pct_6", "mask_25pct_6"}});
    for (const auto& c : cells) {
        std::vector<std::string> row{format_real(c.eps_x), format_real(c.eps_y)};
        for (const auto& t : kShadowMasks) row.push_back(mask_value(c, t) ? "1" : "0");
        masks.add_row_raw(row);
    }
    masks.write(sub_path(ctx, "masks.csv"));
    write_manifest(ctx, params);
}

void run_return_map(const RunContext& ctx, const json& params, bool attractor) {
    ZMapCoeffs coeffs;
    if (params.contains("coeffs")) {
        coeffs = zmap_coeffs_from_json(load_json_file(params.at("coeffs").get<std::string>()));
    } else {
        const ToyModelSpec model =
            toy_model_from_json(load_json_file(params.at("model").get<std::string>()));
        const GlobalMapSpec glob =
            global_map_from_json(load_json_file(params.at("global").get<std::string>()));
        coeffs = coeffs_from_model(model, glob).coeffs;
    }
    if (params.contains("mode"))
        coeffs.mode = params.at("mode").get<std::string>() == "extended" ? ZMapMode::extended
                                                                         : ZMapMode::truncated;
    const auto start = params.at("start").get<std::vector<double>>();
    if (start.size() != 3) throw ConfigError("start must have 3 components z,r,phi");
    const long n = params.at("n").get<long>();
    const long transient =
        attractor && params.contains("transient") ? params.at("transient").get<long>() : 0;

    CsvBuilder csv(CsvSchema{{"n", "z", "r", "phi"}});
    ZState s{start[0], start[1], start[2]};
    const auto map = make_map_fn(coeffs);
    const IterateResult res = iterate_orbit(map, s, n + transient, [&](long i, const ZState& st) {
        if (i > transient)
            csv.add_row({static_cast<double>(i - transient), st.z, st.r, st.phi});
    });
    csv.write(sub_path(ctx, "orbit.csv"));

    json doc{{"completed", res.completed}, {"escaped", res.escaped}};
    if (attractor && params.contains("lyapunov") && params.at("lyapunov").get<bool>()) {
        const auto lyap =
            lyapunov_spectrum(map, make_jacobian_fn(coeffs), s, n, 1, transient);
        json ex = json::array();
        for (double e : lyap.exponents)
            ex.push_back(std::isfinite(e) ? json(e) : json("-inf"));
        doc["lyapunov"] = ex;
    }
    atomic_write(sub_path(ctx, "summary.json"), doc.dump(2) + "\n");
    write_manifest(ctx, params);
    std::cout << doc.dump(2) << "\n";
}

void run_henon_check(const RunContext& ctx, const json& params) {
    const HenonFamily fam = solve_dependent_coefficients(
        params.at("a3").get<double>(), params.at("b1").get<double>(),
        params.at("b2").get<double>(), params.at("gamma").get<int>(),
        params.contains("a4") ? params.at("a4").get<double>() : 0.0,
        params.contains("a5") ? params.at("a5").get<double>() : 0.0,
        params.contains("c3") ? params.at("c3").get<double>() : 0.0);
    const double step = params.contains("step") ? params.at("step").get<double>() : 1e-3;
    const NormalFormQuadratics q = extract_normal_form_quadratics(fam, step);
    const NormalFormQuadratics v = extract_normal_form_quadratics_preimage_z(fam, step);
    json doc{{"coefficients",
              {{"a1", fam.a1},
               {"a2", fam.a2},
               {"a3", fam.a3},
               {"a4", fam.a4},
               {"a5", fam.a5},
               {"b1", fam.b1},
               {"b2", fam.b2},
               {"b3", fam.b3},
               {"b4", fam.b4},
               {"b5", fam.b5},
               {"c1", fam.c1},
               {"c3", fam.c3},
               {"gamma", fam.gamma}}},
             {"A", q.A},
             {"B", q.B},
             {"C", q.C},
             {"linear_residuals", q.linear_residuals},
             {"second_residuals", q.second_residuals},
             {"lorenz_value", q.lorenz_value},
             {"satisfied", q.satisfied},
             {"preimage_z_variant",
              {{"A", v.A},
               {"B", v.B},
               {"C", v.C},
               {"linear_residuals", v.linear_residuals},
               {"second_residuals", v.second_residuals},
               {"lorenz_value", v.lorenz_value},
               {"satisfied", v.satisfied}}}};
    const std::string text = doc.dump(2) + "\n";
    atomic_write(sub_path(ctx, "henon.json"), text);
    write_manifest(ctx, params);
    std::cout << text;
}

void run_cone_check(const RunContext& ctx, const json& params) {
    const ZMapCoeffs coeffs =
        zmap_coeffs_from_json(load_json_file(params.at("coeffs").get<std::string>()));
    const long samples =
        params.contains("samples") ? params.at("samples").get<long>() : 100000;
    const PartialBounds b = partial_bounds(coeffs);
    const double gamma = coeffs.gamma_int();

    ConeParams cone{0, 0};
    if (params.contains("L") && params.contains("c_cone")) {
        cone = ConeParams{params.at("L").get<double>(), params.at("c_cone").get<double>()};
    } else {
        const FeasibleCone fc = feasible_cone_params(b, gamma);
        if (!fc.feasible) throw std::runtime_error("cone-check: no feasible cone parameters");
        cone = fc.params;
    }
    const ConeCheck chk = check_cone_invariance(b, gamma, cone);
    const long violations = monte_carlo_cone_check(coeffs, cone, samples, ctx.seed);
    json doc{{"bounds",
              {{"omega_r", b.omega_r},
               {"omega_phi", b.omega_phi},
               {"gamma_r", b.gamma_r},
               {"gamma_phi", b.gamma_phi},
               {"b_r", b.b_r},
               {"b_phi", b.b_phi},
               {"c_r", b.c_r},
               {"c_phi", b.c_phi},
               {"refine_delta", b.refine_delta}}},
             {"L", cone.L},
             {"c_cone", cone.c_cone},
             {"lhs", chk.lhs},
             {"rhs", chk.rhs},
             {"holds", chk.holds},
             {"violations", violations}};
    const std::string text = doc.dump(2) + "\n";
    atomic_write(sub_path(ctx, "cone.json"), text);
    write_manifest(ctx, params);
    std::cout << text;
}

void run_foliation(const RunContext& ctx, const json& params) {
    ZMapCoeffs coeffs =
        zmap_coeffs_from_json(load_json_file(params.at("coeffs").get<std::string>()));
    FieldSeries2D a1 = params.contains("a1_const")
                           ? FieldSeries2D::constant(params.at("a1_const").get<double>())
                           : field2d_from_json(load_json_file(params.at("a1").get<std::string>()));
    const double h = params.at("h").get<double>();

    GridSpec spec;
    if (params.contains("y0")) spec.y0 = params.at("y0").get<double>();
    if (params.contains("ymin")) spec.y_min = params.at("ymin").get<double>();
    if (params.contains("grid")) {
        const auto g = params.at("grid").get<std::vector<int>>();
        if (g.size() != 3) throw ConfigError("grid must be [nz, nr, nphi]");
        spec.nz = g[0];
        spec.nr = g[1];
        spec.nphi = g[2];
    }
    const double tol = params.contains("tol") ? params.at("tol").get<double>() : 1e-10;

    const ExtendedMap4D map(coeffs, a1, h, coeffs.mode == ZMapMode::extended);
    const FoliationResult res = fixed_point_field(map, spec, tol);

    json doc{{"A3", res.bounds.A3},
             {"B2", res.bounds.B2},
             {"C2", res.bounds.C2},
             {"D2", res.bounds.D2},
             {"y_star", res.bounds.y_star},
             {"q", res.bounds.q},
             {"ball_norm", res.bounds.ball_norm},
             {"ball_bound", res.bounds.ball_bound},
             {"ball_ok", res.ball_ok},
             {"sweeps", res.sweeps},
             {"residual", res.residual}};

    CsvBuilder csv(CsvSchema{{"y", "z", "r", "phi", "mu_z", "mu_r", "mu_phi"}});
    for (int k = 0; k < res.mu0.levels(); ++k)
        for (int iz = 0; iz < spec.nz; ++iz)
            for (int ir = 0; ir < spec.nr; ++ir)
                for (int ip = 0; ip < spec.nphi; ++ip) {
                    const auto x = res.mu0.node_x(iz, ir, ip);
                    csv.add_row({res.mu0.level_y(k), x[0], x[1], x[2],
                                 res.mu0.at(k, iz, ir, ip, 0), res.mu0.at(k, iz, ir, ip, 1),
                                 res.mu0.at(k, iz, ir, ip, 2)});
                }
    csv.write(sub_path(ctx, "mu0.csv"));

    if (params.contains("check_correspondence") && params.at("check_correspondence").get<bool>()) {
        const int iters = params.contains("iters") ? params.at("iters").get<int>() : 30;
        const int nstarts = params.contains("starts") ? params.at("starts").get<int>() : 100;
        std::vector<std::array<double, 4>> starts;
        SplitMix64 rng = substream(ctx.seed, 7);
        for (int i = 0; i < nstarts; ++i)
            starts.push_back({rng.uniform_open(spec.y0 * 0.1, spec.y0), rng.uniform(),
                              rng.uniform(), rng.uniform()});
        const CorrespondenceReport rep = leaf_correspondence_check(map, res.mu0, starts, iters);
        doc["correspondence"] = {{"max_gap", rep.max_gap},
                                 {"fitted_const", rep.fitted_const},
                                 {"v2_decreasing_after_first", rep.v2_decreasing_after_first},
                                 {"gap_decreasing_tail", rep.gap_decreasing_tail}};
    }

    const std::string text = doc.dump(2) + "\n";
    atomic_write(sub_path(ctx, "foliation.json"), text);
    write_manifest(ctx, params);
    std::cout << text;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"channel-lab: replicator homoclinic-channel and saddle-center return-map "
                 "experiments"};
    app.require_subcommand(0, 1);

    RunContext ctx;
    std::string config_file;
    app.add_option("--out", ctx.out_dir, "output directory");
    app.add_option("--seed", ctx.seed, "master seed");
    app.add_option("--threads", ctx.threads, "worker threads (0 = hardware)");
    app.add_option("--config", config_file, "run config JSON {subcommand, seed, out, params}");

    if (const char* env = std::getenv("CHANNEL_LAB_THREADS"); env && *env)
        ctx.threads = std::atoi(env);

    // flag mirrors build the same strict parameter block the config file uses
    json params;

    auto* eq = app.add_subcommand("rsp-equilibria", "the six face equilibria with residuals");
    double eps_x = 0, eps_y = 0;
    eq->add_option("--eps-x", eps_x)->required();
    eq->add_option("--eps-y", eps_y)->required();

    auto* sim = app.add_subcommand("rsp-simulate", "integrate the replicator field");
    std::vector<double> sim_start;
    double sim_t = 100.0, sim_rel = 1e-10, sim_abs = 1e-12, sim_face_events = 0.0;
    sim->add_option("--eps-x", eps_x)->required();
    sim->add_option("--eps-y", eps_y)->required();
    sim->add_option("--start", sim_start, "x1,x2,y1,y2")->required()->expected(4);
    sim->add_option("--t", sim_t);
    sim->add_option("--rel-tol", sim_rel);
    sim->add_option("--abs-tol", sim_abs);
    sim->add_option("--face-events", sim_face_events,
                    "log entries into each face's rho-ball at this radius");

    auto* rates = app.add_subcommand("rates", "transverse rate integral around a face orbit");
    std::string rates_face = "b";
    double rates_energy = 0.1;
    rates->add_option("--eps-x", eps_x)->required();
    rates->add_option("--eps-y", eps_y)->required();
    rates->add_option("--face", rates_face, "a..f or all");
    rates->add_option("--energy", rates_energy);

    auto* scat = app.add_subcommand("scatter", "face-to-face scattering estimate");
    std::vector<double> scat_energies, scat_phases;
    double scat_delta = 1e-4, scat_rho = 0.05;
    std::string scat_face = "b";
    bool scat_svg = false;
    scat->add_option("--eps-x", eps_x)->required();
    scat->add_option("--eps-y", eps_y)->required();
    scat->add_option("--face", scat_face);
    scat->add_option("--energies", scat_energies)->required();
    scat->add_option("--phases", scat_phases)->required();
    scat->add_option("--delta", scat_delta);
    scat->add_option("--rho", scat_rho);
    scat->add_flag("--svg", scat_svg);

    auto* shadow = app.add_subcommand("shadow", "shadowing fraction sweep over the tie-reward grid");
    ShadowParams shp;
    std::string shadow_start = "b";
    shadow->add_option("--grid-min", shp.grid_min);
    shadow->add_option("--grid-max", shp.grid_max);
    shadow->add_option("--grid-step", shp.grid_step);
    shadow->add_option("--n", shp.n);
    shadow->add_option("--delta", shp.delta);
    shadow->add_option("--rho", shp.rho);
    shadow->add_option("--kmax", shp.kmax);
    shadow->add_option("--start", shadow_start);
    shadow->add_option("--max-time", shp.max_time);

    auto* rmap = app.add_subcommand("return-map", "iterate the (z, r, phi) return map");
    auto* attr = app.add_subcommand("attractor", "return-map orbit with attractor diagnostics");
    std::string rm_coeffs, rm_model, rm_global, rm_mode;
    std::vector<double> rm_start;
    long rm_n = 1000, rm_transient = 0;
    bool rm_lyap = false;
    for (CLI::App* sc : {rmap, attr}) {
        sc->add_option("--coeffs", rm_coeffs, "coefficient config JSON");
        sc->add_option("--model", rm_model, "toy-model config JSON");
        sc->add_option("--global", rm_global, "global-map config JSON");
        sc->add_option("--mode", rm_mode, "truncated|extended");
        sc->add_option("--start", rm_start, "z,r,phi")->required()->expected(3);
        sc->add_option("--n", rm_n);
    }
    attr->add_flag("--lyapunov", rm_lyap);
    attr->add_option("--transient", rm_transient);

    auto* henon = app.add_subcommand("henon-check", "quadratic normal form of the polynomial family");
    double h_a3 = 1, h_b1 = -2, h_b2 = -1, h_a4 = 0, h_a5 = 0, h_c3 = 0, h_step = 1e-3;
    int h_gamma = 5;
    henon->add_option("--a3", h_a3)->required();
    henon->add_option("--b1", h_b1)->required();
    henon->add_option("--b2", h_b2)->required();
    henon->add_option("--gamma", h_gamma)->required();
    henon->add_option("--a4", h_a4);
    henon->add_option("--a5", h_a5);
    henon->add_option("--c3", h_c3);
    henon->add_option("--step", h_step);

    auto* cone = app.add_subcommand("cone-check", "invariant cone-field verification");
    std::string cone_coeffs;
    long cone_samples = 100000;
    double cone_L = -1, cone_c = -1;
    cone->add_option("--coeffs", cone_coeffs)->required();
    cone->add_option("--samples", cone_samples);
    cone->add_option("--L", cone_L);
    cone->add_option("--c-cone", cone_c);

    auto* fol = app.add_subcommand("foliation", "invariant-foliation fixed point and leaves");
    std::string fol_coeffs, fol_grid = "16:12:16";
    double fol_a1 = 1.0, fol_h = 0.1, fol_y0 = 1e-4, fol_ymin = 1e-12, fol_tol = 1e-10;
    bool fol_corr = false;
    fol->add_option("--coeffs", fol_coeffs)->required();
    fol->add_option("--a1-const", fol_a1);
    fol->add_option("--section-h", fol_h);
    fol->add_option("--y0", fol_y0);
    fol->add_option("--ymin", fol_ymin);
    fol->add_option("--grid", fol_grid, "nz:nr:nphi");
    fol->add_option("--tol", fol_tol);
    fol->add_flag("--check-correspondence", fol_corr);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (!config_file.empty()) {
            const json cfg = load_json_file(config_file);
            require_keys(cfg, {"subcommand", "params"}, {"seed", "out", "threads", "version"});
            ctx.subcommand = cfg.at("subcommand").get<std::string>();
            if (cfg.contains("seed")) ctx.seed = cfg.at("seed").get<uint64_t>();
            if (cfg.contains("out")) ctx.out_dir = cfg.at("out").get<std::string>();
            if (cfg.contains("threads")) ctx.threads = cfg.at("threads").get<int>();
            params = cfg.at("params");
        } else if (eq->parsed()) {
            ctx.subcommand = "rsp-equilibria";
            params = {{"eps_x", eps_x}, {"eps_y", eps_y}};
        } else if (sim->parsed()) {
            ctx.subcommand = "rsp-simulate";
            params = {{"eps_x", eps_x}, {"eps_y", eps_y}, {"start", sim_start},
                      {"t", sim_t},     {"rel_tol", sim_rel}, {"abs_tol", sim_abs}};
            if (sim_face_events > 0.0) params["face_events"] = sim_face_events;
        } else if (rates->parsed()) {
            ctx.subcommand = "rates";
            params = {{"eps_x", eps_x},
                      {"eps_y", eps_y},
                      {"face", rates_face},
                      {"energy", rates_energy}};
        } else if (scat->parsed()) {
            ctx.subcommand = "scatter";
            params = {{"eps_x", eps_x},   {"eps_y", eps_y},       {"face", scat_face},
                      {"energies", scat_energies}, {"phases", scat_phases}, {"delta", scat_delta},
                      {"rho", scat_rho},  {"svg", scat_svg}};
        } else if (shadow->parsed()) {
            ctx.subcommand = "shadow";
            params = {{"grid_min", shp.grid_min}, {"grid_max", shp.grid_max},
                      {"grid_step", shp.grid_step}, {"n", shp.n},
                      {"delta", shp.delta},       {"rho", shp.rho},
                      {"kmax", shp.kmax},         {"start", shadow_start},
                      {"max_time", shp.max_time}};
        } else if (rmap->parsed() || attr->parsed()) {
            ctx.subcommand = rmap->parsed() ? "return-map" : "attractor";
            params = json::object();
            if (!rm_coeffs.empty()) params["coeffs"] = rm_coeffs;
            if (!rm_model.empty()) params["model"] = rm_model;
            if (!rm_global.empty()) params["global"] = rm_global;
            if (!rm_mode.empty()) params["mode"] = rm_mode;
            params["start"] = rm_start;
            params["n"] = rm_n;
            if (attr->parsed()) {
                params["lyapunov"] = rm_lyap;
                params["transient"] = rm_transient;
            }
        } else if (henon->parsed()) {
            ctx.subcommand = "henon-check";
            params = {{"a3", h_a3}, {"b1", h_b1}, {"b2", h_b2},   {"gamma", h_gamma},
                      {"a4", h_a4}, {"a5", h_a5}, {"c3", h_c3},   {"step", h_step}};
        } else if (cone->parsed()) {
            ctx.subcommand = "cone-check";
            params = {{"coeffs", cone_coeffs}, {"samples", cone_samples}};
            if (cone_L > 0 && cone_c > 0) {
                params["L"] = cone_L;
                params["c_cone"] = cone_c;
            }
        } else if (fol->parsed()) {
            ctx.subcommand = "foliation";
            int nz, nr, np;
            if (std::sscanf(fol_grid.c_str(), "%d:%d:%d", &nz, &nr, &np) != 3)
                throw ConfigError("grid must be nz:nr:nphi");
            params = {{"coeffs", fol_coeffs}, {"a1_const", fol_a1}, {"h", fol_h},
                      {"y0", fol_y0},         {"ymin", fol_ymin},   {"tol", fol_tol},
                      {"grid", std::vector<int>{nz, nr, np}},
                      {"check_correspondence", fol_corr}};
        } else {
            std::cerr << app.help() << "\n";
            return 2;
        }

        // dispatch; the handlers re-validate the parameter block strictly
        if (ctx.subcommand == "rsp-equilibria") {
            require_keys(params, {"eps_x", "eps_y"});
            run_rsp_equilibria(ctx, params);
        } else if (ctx.subcommand == "rsp-simulate") {
            require_keys(params, {"eps_x", "eps_y", "start", "t"},
                         {"rel_tol", "abs_tol", "face_events"});
            run_rsp_simulate(ctx, params);
        } else if (ctx.subcommand == "rates") {
            require_keys(params, {"eps_x", "eps_y", "face", "energy"});
            run_rates(ctx, params);
        } else if (ctx.subcommand == "scatter") {
            require_keys(params, {"eps_x", "eps_y", "face", "energies", "phases", "delta"},
                         {"rho", "max_time", "svg"});
            run_scatter(ctx, params);
        } else if (ctx.subcommand == "shadow") {
            require_keys(params, {},
                         {"grid_min", "grid_max", "grid_step", "n", "delta", "rho", "kmax",
                          "start", "max_time"});
            run_shadow(ctx, params);
        } else if (ctx.subcommand == "return-map" || ctx.subcommand == "attractor") {
            require_keys(params, {"start", "n"},
                         {"coeffs", "model", "global", "mode", "lyapunov", "transient"});
            run_return_map(ctx, params, ctx.subcommand == "attractor");
        } else if (ctx.subcommand == "henon-check") {
            require_keys(params, {"a3", "b1", "b2", "gamma"}, {"a4", "a5", "c3", "step"});
            run_henon_check(ctx, params);
        } else if (ctx.subcommand == "cone-check") {
            require_keys(params, {"coeffs"}, {"samples", "L", "c_cone"});
            run_cone_check(ctx, params);
        } else if (ctx.subcommand == "foliation") {
            require_keys(params, {"coeffs", "h"},
                         {"a1", "a1_const", "y0", "ymin", "grid", "tol", "check_correspondence",
                          "starts", "iters"});
            run_foliation(ctx, params);
        } else {
            throw ConfigError("unknown subcommand: " + ctx.subcommand);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        json err{{"error", e.what()}, {"subcommand", ctx.subcommand}};
        std::cerr << err.dump() << "\n";
        try {
            atomic_write(ctx.out_dir + "/" + ctx.subcommand + "/error.json", err.dump(2) + "\n");
        } catch (...) {
        }
        return 3;
    }
    return 0;
}
