#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "chanlab/artifacts.hpp"
#include "chanlab/config.hpp"
#include "checks.hpp"

namespace {

int run_cmd(const std::string& args) {
    const std::string cmd = std::string(CHANNEL_LAB_BIN) + " " + args + " > /dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WEXITSTATUS(st);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    CHECK_MSG(static_cast<bool>(in), "missing file %s", path.c_str());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool exists(const std::string& path) { return std::ifstream(path).good(); }

} // namespace

int main() {
    using namespace chanlab;
    const std::string tmp = "cli_scratch";
    if (std::system(("rm -rf " + tmp).c_str()) != 0) return 1;
    ensure_dir(tmp);

    { // equilibria values on stdout artifact, manifest written
        CHECK(run_cmd("--out " + tmp + "/eq rsp-equilibria --eps-x 0 --eps-y 0") == 0);
        const json doc = load_json_file(tmp + "/eq/rsp-equilibria/equilibria.json");
        CHECK(doc.is_array() && doc.size() == 6);
        CHECK(doc[0].at("face") == "a");
        const auto pt = doc[0].at("point").get<std::vector<double>>();
        CHECK_NEAR(pt[0], 0.0, 0.0);
        CHECK_NEAR(pt[1], 2.0 / 3.0, 1e-12);
        CHECK_NEAR(pt[2], 1.0 / 3.0, 1e-12);
        CHECK_NEAR(pt[3], 2.0 / 3.0, 1e-12);
        CHECK(doc[0].at("residual").get<double>() <= 1e-12);
        CHECK(exists(tmp + "/eq/rsp-equilibria/manifest.json"));
        CHECK(!exists(tmp + "/eq/rsp-equilibria/equilibria.json.tmp"));
        testutil::pass("rsp-equilibria");
    }

    { // malformed config: unknown key rejected with exit 2, no artifacts
        atomic_write(tmp + "/bad.json",
                     R"({"subcommand":"rsp-equilibria","params":{"eps_x":0,"eps_y":0,"epz":1}})");
        CHECK(run_cmd("--out " + tmp + "/bad rsp-equilibria --eps-x 0 --eps-y 0 --config " +
                      tmp + "/bad.json") == 2);
        CHECK(!exists(tmp + "/bad/rsp-equilibria/equilibria.json"));
        CHECK(run_cmd("rsp-equilibria --eps-x 0 --eps-y 0 --no-such-flag") == 2);
        testutil::pass("strict config");
    }

    { // identical seed and config give byte-identical artifacts
        const std::string flags =
            " shadow --grid-min -0.2 --grid-max -0.1 --grid-step 0.1 --n 8 --kmax 6 "
            "--max-time 500";
        CHECK(run_cmd("--seed 42 --out " + tmp + "/s1" + flags) == 0);
        CHECK(run_cmd("--seed 42 --out " + tmp + "/s2" + flags) == 0);
        CHECK(slurp(tmp + "/s1/shadow/fractions.csv") == slurp(tmp + "/s2/shadow/fractions.csv"));
        CHECK(slurp(tmp + "/s1/shadow/masks.csv") == slurp(tmp + "/s2/shadow/masks.csv"));

        // fractions.csv carries kmax+1 rows per cell
        std::istringstream lines(slurp(tmp + "/s1/shadow/fractions.csv"));
        std::string line;
        int rows = 0;
        while (std::getline(lines, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 1 + 4 * 7); // header + 2x2 cells x (kmax+1)

        // the manifest is a loadable run config that reproduces the run
        CHECK(run_cmd("--config " + tmp + "/s1/shadow/manifest.json") == 0);
        CHECK(slurp(tmp + "/s1/shadow/fractions.csv") == slurp(tmp + "/s2/shadow/fractions.csv"));
        testutil::pass("deterministic artifacts");
    }

    { // CSV builder: header-only file, bit-exact round trip at 17 digits
        CsvBuilder empty(CsvSchema{{"a", "b"}});
        CHECK(empty.text() == "a,b\r\n");

        CsvBuilder csv(CsvSchema{{"x"}});
        const double v = -0.12345678901234567;
        csv.add_row({v});
        std::istringstream in(csv.text());
        std::string header, cell;
        std::getline(in, header);
        std::getline(in, cell);
        CHECK(std::stod(cell) == v);
        CHECK_THROWS(csv.add_row({1.0, 2.0}), std::invalid_argument);
        testutil::pass("csv builder");
    }

    { // SVG scatter: well-formed, hand-computable placement, deterministic
        const SvgAxes axes{0.0, 1.0, 0.0, 1.0, "x", "y"};
        const std::string empty = render_svg_scatter({}, axes);
        CHECK(empty.rfind("<?xml", 0) == 0);
        CHECK(empty.find("</svg>") != std::string::npos);
        CHECK(empty.find("<circle") == std::string::npos);

        const std::string three =
            render_svg_scatter({{0.0, 0.0}, {0.5, 0.5}, {1.0, 1.0}}, axes);
        // frame is 640x480 with 50 px margins: (0.5, 0.5) -> (320, 240)
        CHECK(three.find("<circle cx=\"50\" cy=\"430\"") != std::string::npos);
        CHECK(three.find("<circle cx=\"320\" cy=\"240\"") != std::string::npos);
        CHECK(three.find("<circle cx=\"590\" cy=\"50\"") != std::string::npos);
        CHECK(three == render_svg_scatter({{0.0, 0.0}, {0.5, 0.5}, {1.0, 1.0}}, axes));

        CHECK_THROWS(render_svg_scatter(
                         std::vector<std::pair<double, double>>(1000001, {0.5, 0.5}), axes),
                     std::invalid_argument);
        CHECK_THROWS(render_svg_scatter({}, SvgAxes{1.0, 0.0, 0.0, 1.0, "", ""}),
                     std::invalid_argument);
        testutil::pass("svg scatter");
    }

    { // henon-check emits the completed family and both jets
        CHECK(run_cmd("--out " + tmp +
                      "/h henon-check --a3 1 --b1 -2 --b2 -1 --gamma 5") == 0);
        const json doc = load_json_file(tmp + "/h/henon-check/henon.json");
        CHECK_NEAR(doc.at("coefficients").at("a2").get<double>(), -8.0, 1e-12);
        CHECK(doc.contains("preimage_z_variant"));
        CHECK(doc.at("preimage_z_variant").at("satisfied").get<bool>());
        testutil::pass("henon-check");
    }

    { // return-map and cone-check consume a coefficient config file
        json coeffs{{"Omega", json{{"kind", "series2d"},
                                   {"coeffs", json::array({json::array({1, 0, 0, 0.02})})}}},
                    {"Gamma", json{{"kind", "series2d"},
                                   {"coeffs", json::array({json::array({0, 0, 0, 5.0})})}}},
                    {"b0", json{{"kind", "series2d"},
                                {"coeffs", json::array({json::array({0, 0, 0, 0.5}),
                                                        json::array({1, 0, 0, 0.02})})}}},
                    {"c", json{{"kind", "series2d"},
                               {"coeffs", json::array({json::array({0, 0, 0, 0.2})})}}},
                    {"z_mod_one", true}};
        atomic_write(tmp + "/coeffs.json", coeffs.dump());

        CHECK(run_cmd("--out " + tmp + "/rm return-map --coeffs " + tmp +
                      "/coeffs.json --start 0.2 0.5 0.1 --n 50") == 0);
        CHECK(exists(tmp + "/rm/return-map/orbit.csv"));

        CHECK(run_cmd("--out " + tmp + "/att attractor --coeffs " + tmp +
                      "/coeffs.json --start 0.2 0.5 0.1 --n 2000 --transient 100 --lyapunov") ==
              0);
        const json att = load_json_file(tmp + "/att/attractor/summary.json");
        CHECK(att.contains("lyapunov"));

        CHECK(run_cmd("--seed 3 --out " + tmp + "/cone cone-check --coeffs " + tmp +
                      "/coeffs.json --samples 20000") == 0);
        const json cone = load_json_file(tmp + "/cone/cone-check/cone.json");
        CHECK(cone.at("holds").get<bool>());
        CHECK(cone.at("violations").get<long>() == 0);
        testutil::pass("coefficient-file subcommands");
    }

    { // numeric failures map to exit 3 with a machine-readable report
        json coeffs{{"Omega", json{{"kind", "series2d"},
                                   {"coeffs", json::array({json::array({1, 0, 0, 0.1})})}}},
                    {"Gamma", json{{"kind", "series2d"},
                                   {"coeffs", json::array({json::array({0, 0, 0, 2.0})})}}},
                    {"b0", json{{"kind", "series2d"},
                                {"coeffs", json::array({json::array({0, 0, 0, 0.5})})}}},
                    {"c", json{{"kind", "series2d"},
                               {"coeffs", json::array({json::array({0, 0, 0, 0.2})})}}},
                    {"z_mod_one", true}};
        atomic_write(tmp + "/flat.json", coeffs.dump());
        // constant b0 makes det dF/dx vanish: the foliation hypothesis fails
        CHECK(run_cmd("--out " + tmp + "/fol foliation --coeffs " + tmp +
                      "/flat.json --section-h 0.1 --y0 1e-4") == 3);
        CHECK(exists(tmp + "/fol/foliation/error.json"));
        testutil::pass("numeric failure exit code");
    }

    return testutil::failures();
}
