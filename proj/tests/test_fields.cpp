#include "chanlab/fields.hpp"

#include <cmath>

#include "chanlab/config.hpp"
#include "chanlab/rng.hpp"
#include "checks.hpp"

using namespace chanlab;

namespace {

// term-by-term reference sum, independent of the recurrence-based evaluator
double naive_value(const FieldSeries2D& f, double r, double phi) {
    double acc = 0.0;
    for (const auto& t : f.terms()) {
        const int k = static_cast<int>(t[0]), m = static_cast<int>(t[1]), s = static_cast<int>(t[2]);
        const double ang = 2.0 * M_PI * m * (phi - std::floor(phi));
        acc += t[3] * std::pow(r, k) * (s == 0 ? std::cos(ang) : std::sin(ang));
    }
    return acc;
}

FieldSeries2D random_field(SplitMix64& rng, int kmax = 4, int mmax = 4, double scale = 1.0) {
    FieldSeries2D f;
    for (int k = 0; k <= kmax; ++k)
        for (int m = 0; m <= mmax; ++m)
            for (int s = (m == 0 ? 0 : 0); s < (m == 0 ? 1 : 2); ++s)
                f.set(k, m, s, scale * (2.0 * rng.uniform() - 1.0));
    return f;
}

} // namespace

int main() {
    SplitMix64 rng(20260810);

    { // constant and trivial evaluations
        CHECK_NEAR(FieldSeries1D({3.0}).value(0.7), 3.0, 0.0);
        FieldSeries2D f = FieldSeries2D::constant(1.0);
        f.set(0, 1, 1, 1.0); // 1 + sin(2 pi phi)
        CHECK_NEAR(f.value(0.5, 0.25), 2.0, 1e-15);
        testutil::pass("trivial evaluations");
    }

    { // naive-summation oracle on random degree-(4,4) series
        const FieldSeries2D f = random_field(rng);
        for (int i = 0; i < 100; ++i) {
            const double r = rng.uniform(), phi = 3.0 * (rng.uniform() - 0.5);
            CHECK_NEAR(f.value(r, phi), naive_value(f, r, phi), 1e-12);
        }
        testutil::pass("naive-summation oracle");
    }

    { // partial derivatives: trivial cases and the finite-difference oracle
        double dr, dphi;
        FieldSeries2D::constant(4.0).partials(0.3, 0.9, dr, dphi);
        CHECK_NEAR(dr, 0.0, 0.0);
        CHECK_NEAR(dphi, 0.0, 0.0);

        FieldSeries2D f;
        f.set(2, 1, 0, 1.0); // r^2 cos(2 pi phi)
        f.partials(0.5, 0.0, dr, dphi);
        CHECK_NEAR(dr, 1.0, 1e-14);
        CHECK_NEAR(dphi, 0.0, 1e-14);

        const FieldSeries2D g = random_field(rng);
        const double step = 1e-5;
        for (int i = 0; i < 50; ++i) {
            const double r = 0.1 + 0.8 * rng.uniform(), phi = rng.uniform();
            g.partials(r, phi, dr, dphi);
            const double fd_r = (g.value(r + step, phi) - g.value(r - step, phi)) / (2 * step);
            const double fd_p = (g.value(r, phi + step) - g.value(r, phi - step)) / (2 * step);
            const double scale_r = std::max(1.0, std::fabs(dr));
            const double scale_p = std::max(1.0, std::fabs(dphi));
            CHECK_NEAR(dr / scale_r, fd_r / scale_r, 1e-6);
            CHECK_NEAR(dphi / scale_p, fd_p / scale_p, 1e-6);
        }
        testutil::pass("partials vs central differences");
    }

    { // phi average: trivial cases and the trapezoid quadrature oracle
        FieldSeries2D f = FieldSeries2D::constant(1.0);
        f.set(0, 1, 1, 1.0);
        CHECK_NEAR(f.average_over_phi().value(0.3), 1.0, 0.0);
        CHECK_NEAR(FieldSeries2D::constant(5.0).average_over_phi().value(0.9), 5.0, 0.0);

        const FieldSeries2D g = random_field(rng);
        const FieldSeries1D avg = g.average_over_phi();
        for (int rep = 0; rep < 5; ++rep) {
            const double r = rng.uniform();
            const int n = 10000;
            double quad = 0.0;
            for (int j = 0; j < n; ++j) quad += g.value(r, (j + 0.5) / n);
            quad /= n;
            CHECK_NEAR(avg.value(r), quad, 1e-10);
        }
        testutil::pass("phi average vs quadrature");
    }

    { // exact periodicity: arguments with headroom for an exact +1
        const FieldSeries2D f = random_field(rng, 8, 8);
        for (int i = 0; i < 100; ++i) {
            const double r = rng.uniform();
            const double phi = static_cast<double>(rng.next() >> 21) * 0x1.0p-43;
            CHECK(f.value(r, phi) == f.value(r, phi + 1.0));
        }
        testutil::pass("exact periodicity");
    }

    { // linearity of evaluation
        const FieldSeries2D f = random_field(rng), g = random_field(rng);
        const double a = 0.37, b = -1.21;
        FieldSeries2D comb = f;
        comb.scale(a);
        comb.axpy(b, g);
        for (int i = 0; i < 50; ++i) {
            const double r = rng.uniform(), phi = rng.uniform();
            CHECK_NEAR(comb.value(r, phi), a * f.value(r, phi) + b * g.value(r, phi), 1e-14);
        }
        testutil::pass("linearity");
    }

    { // the phi-shift leaves the mean untouched, coefficient-exactly
        const FieldSeries2D f = random_field(rng);
        for (double delta : {0.125, 0.4, 0.77}) {
            const FieldSeries1D a0 = f.average_over_phi();
            const FieldSeries1D a1 = f.shifted_phi(delta).average_over_phi();
            CHECK(a0.coeffs() == a1.coeffs());
        }
        testutil::pass("shift-invariant mean");
    }

    { // serialization round trip, bit exact
        const FieldSeries2D f = random_field(rng, 6, 6);
        const json j = field_to_json(f);
        const FieldSeries2D back = field2d_from_json(json::parse(j.dump()));
        CHECK(f == back);

        const FieldSeries1D g({0.1, -0.77215664901532861, 3e-15});
        const FieldSeries1D gback = field1d_from_json(json::parse(field_to_json(g).dump()));
        CHECK(g.coeffs() == gback.coeffs());
        testutil::pass("bit-exact serialization");
    }

    { // construction errors
        CHECK_THROWS(FieldSeries1D({1.0, std::nan("")}), std::invalid_argument);
        FieldSeries2D f;
        CHECK_THROWS(f.set(0, 9, 0, 1.0), std::invalid_argument);
        CHECK_THROWS(f.set(0, 0, 1, 1.0), std::invalid_argument);
        CHECK_THROWS(require_positive_on_grid(FieldSeries1D({-1.0}), "t"), std::invalid_argument);
        testutil::pass("construction errors");
    }

    return testutil::failures();
}
