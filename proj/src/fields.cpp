#include "chanlab/fields.hpp"

#include <algorithm>

namespace chanlab {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite coefficient");
}
} // namespace

FieldSeries1D::FieldSeries1D(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
    if (coeffs_.empty()) coeffs_.assign(1, 0.0);
    if (static_cast<int>(coeffs_.size()) > kMaxFieldDegree + 1)
        throw std::invalid_argument("FieldSeries1D: degree above cap");
    for (double v : coeffs_) require_finite(v, "FieldSeries1D");
}

void FieldSeries2D::set(int k, int m, int s, double value) {
    if (k < 0 || k > kMaxFieldDegree || m < 0 || m > kMaxFieldDegree || s < 0 || s > 1)
        throw std::invalid_argument("FieldSeries2D: term index out of range");
    if (m == 0 && s == 1 && value != 0.0)
        throw std::invalid_argument("FieldSeries2D: sin term with m=0");
    require_finite(value, "FieldSeries2D");
    c_[idx(k, m, s)] = value;
}

double FieldSeries2D::get(int k, int m, int s) const {
    if (k < 0 || k > kMaxFieldDegree || m < 0 || m > kMaxFieldDegree || s < 0 || s > 1)
        throw std::invalid_argument("FieldSeries2D: term index out of range");
    return c_[idx(k, m, s)];
}

double FieldSeries2D::value(double r, double phi) const {
    const double ph = wrap_unit(phi);
    // cos/sin(2 pi m ph) by Chebyshev recurrence; identical values for phi
    // arguments that reduce to the same point, which makes periodicity exact.
    double cosm[kMaxFieldDegree + 1], sinm[kMaxFieldDegree + 1];
    cosm[0] = 1.0;
    sinm[0] = 0.0;
    const double c1 = std::cos(kTwoPi * ph), s1 = std::sin(kTwoPi * ph);
    if (kMaxFieldDegree >= 1) {
        cosm[1] = c1;
        sinm[1] = s1;
    }
    for (int m = 2; m <= kMaxFieldDegree; ++m) {
        cosm[m] = 2.0 * c1 * cosm[m - 1] - cosm[m - 2];
        sinm[m] = 2.0 * c1 * sinm[m - 1] - sinm[m - 2];
    }
    double acc = 0.0, rk = 1.0;
    for (int k = 0; k <= kMaxFieldDegree; ++k) {
        double row = 0.0;
        for (int m = 0; m <= kMaxFieldDegree; ++m)
            row += c_[idx(k, m, 0)] * cosm[m] + c_[idx(k, m, 1)] * sinm[m];
        acc += row * rk;
        rk *= r;
    }
    return acc;
}

void FieldSeries2D::partials(double r, double phi, double& dr, double& dphi) const {
    const double ph = wrap_unit(phi);
    double cosm[kMaxFieldDegree + 1], sinm[kMaxFieldDegree + 1];
    cosm[0] = 1.0;
    sinm[0] = 0.0;
    const double c1 = std::cos(kTwoPi * ph), s1 = std::sin(kTwoPi * ph);
    if (kMaxFieldDegree >= 1) {
        cosm[1] = c1;
        sinm[1] = s1;
    }
    for (int m = 2; m <= kMaxFieldDegree; ++m) {
        cosm[m] = 2.0 * c1 * cosm[m - 1] - cosm[m - 2];
        sinm[m] = 2.0 * c1 * sinm[m - 1] - sinm[m - 2];
    }
    dr = 0.0;
    dphi = 0.0;
    double rk = 1.0, rkm1 = 0.0;
    for (int k = 0; k <= kMaxFieldDegree; ++k) {
        double row = 0.0, drow = 0.0;
        for (int m = 0; m <= kMaxFieldDegree; ++m) {
            const double a = c_[idx(k, m, 0)], b = c_[idx(k, m, 1)];
            row += a * cosm[m] + b * sinm[m];
            drow += kTwoPi * m * (-a * sinm[m] + b * cosm[m]);
        }
        if (k > 0) dr += row * k * rkm1;
        dphi += drow * rk;
        rkm1 = rk;
        rk *= r;
    }
}

FieldSeries1D FieldSeries2D::average_over_phi() const {
    std::vector<double> out(kMaxFieldDegree + 1, 0.0);
    for (int k = 0; k <= kMaxFieldDegree; ++k) out[k] = c_[idx(k, 0, 0)];
    while (out.size() > 1 && out.back() == 0.0) out.pop_back();
    return FieldSeries1D(out);
}

FieldSeries2D FieldSeries2D::shifted_phi(double delta) const {
    FieldSeries2D out;
    for (int k = 0; k <= kMaxFieldDegree; ++k) {
        out.c_[idx(k, 0, 0)] = c_[idx(k, 0, 0)];
        for (int m = 1; m <= kMaxFieldDegree; ++m) {
            const double cd = std::cos(kTwoPi * m * delta), sd = std::sin(kTwoPi * m * delta);
            const double a = c_[idx(k, m, 0)], b = c_[idx(k, m, 1)];
            // cos(2 pi m (phi+delta)) = cos cd - sin sd, sin(...) = sin cd + cos sd
            out.c_[idx(k, m, 0)] = a * cd + b * sd;
            out.c_[idx(k, m, 1)] = -a * sd + b * cd;
        }
    }
    return out;
}

FieldSeries2D& FieldSeries2D::axpy(double a, const FieldSeries2D& g) {
    for (size_t i = 0; i < c_.size(); ++i) c_[i] += a * g.c_[i];
    return *this;
}

FieldSeries2D& FieldSeries2D::scale(double a) {
    for (double& v : c_) v *= a;
    return *this;
}

std::vector<std::array<double, 4>> FieldSeries2D::terms() const {
    std::vector<std::array<double, 4>> out;
    for (int k = 0; k <= kMaxFieldDegree; ++k)
        for (int m = 0; m <= kMaxFieldDegree; ++m)
            for (int s = 0; s < 2; ++s)
                if (c_[idx(k, m, s)] != 0.0)
                    out.push_back({static_cast<double>(k), static_cast<double>(m),
                                   static_cast<double>(s), c_[idx(k, m, s)]});
    return out;
}

void require_positive_on_grid(const FieldSeries1D& f, const std::string& name) {
    for (int i = 0; i < kSignCheckGrid; ++i) {
        const double r = static_cast<double>(i) / (kSignCheckGrid - 1);
        if (!(f.value(r) > kSignCheckMargin))
            throw std::invalid_argument(name + ": not positive on [0,1] grid");
    }
}

void require_negative_on_grid(const FieldSeries1D& f, const std::string& name) {
    for (int i = 0; i < kSignCheckGrid; ++i) {
        const double r = static_cast<double>(i) / (kSignCheckGrid - 1);
        if (!(f.value(r) < -kSignCheckMargin))
            throw std::invalid_argument(name + ": not negative on [0,1] grid");
    }
}

void require_positive_on_grid(const FieldSeries2D& f, const std::string& name) {
    const int n = 64;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double r = static_cast<double>(i) / (n - 1);
            const double ph = static_cast<double>(j) / n;
            if (!(f.value(r, ph) > kSignCheckMargin))
                throw std::invalid_argument(name + ": not positive on grid");
        }
}

void require_range_on_grid(const FieldSeries2D& f, double lo, double hi, const std::string& name) {
    const int n = 64;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double r = static_cast<double>(i) / (n - 1);
            const double ph = static_cast<double>(j) / n;
            const double v = f.value(r, ph);
            if (!(v >= lo && v <= hi))
                throw std::invalid_argument(name + ": leaves [" + std::to_string(lo) + "," +
                                            std::to_string(hi) + "] on grid");
        }
}

} // namespace chanlab
