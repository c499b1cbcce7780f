#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace chanlab {

// Parametric function families on the disc: polynomials in r on [0,1] and
// 1-periodic polynomial x trigonometric tables in (r, phi). The finite basis
// keeps every derivative exact and every field serializable through a config
// file.
constexpr int kMaxFieldDegree = 8; // cap on both the r-degree and the phi frequency

/// x reduced to [0,1). Exact for inputs that are already in range.
inline double wrap_unit(double x) {
    double w = x - std::floor(x);
    return (w >= 1.0) ? w - 1.0 : w;
}

/// distance on the unit circle
inline double circle_dist(double a, double b) {
    double d = wrap_unit(a - b);
    return d > 0.5 ? 1.0 - d : d;
}

class FieldSeries1D {
public:
    FieldSeries1D() : coeffs_(1, 0.0) {}

    explicit FieldSeries1D(std::vector<double> coeffs);

    static FieldSeries1D constant(double v) { return FieldSeries1D(std::vector<double>{v}); }

    double value(double r) const {
        double acc = 0.0;
        for (size_t i = coeffs_.size(); i-- > 0;) acc = acc * r + coeffs_[i];
        return acc;
    }

    double derivative(double r) const {
        double acc = 0.0;
        for (size_t i = coeffs_.size(); i-- > 1;) acc = acc * r + coeffs_[i] * static_cast<double>(i);
        return acc;
    }

    const std::vector<double>& coeffs() const { return coeffs_; }
    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

private:
    std::vector<double> coeffs_; // c_0 .. c_K
};

class FieldSeries2D {
public:
    FieldSeries2D() { c_.fill(0.0); }

    static FieldSeries2D constant(double v) {
        FieldSeries2D f;
        f.set(0, 0, 0, v);
        return f;
    }

    /// term value * r^k * cos(2 pi m phi) (s=0) or * sin(2 pi m phi) (s=1)
    void set(int k, int m, int s, double value);
    void add(int k, int m, int s, double value) { set(k, m, s, get(k, m, s) + value); }
    double get(int k, int m, int s) const;

    double value(double r, double phi) const;

    /// exact partial derivatives of the truncated series
    void partials(double r, double phi, double& dr, double& dphi) const;

    /// mean over one phi period: the m=0 cosine slice, exact for this basis
    FieldSeries1D average_over_phi() const;

    /// the field (r, phi) -> F(r, phi + delta), exact coefficient rotation
    FieldSeries2D shifted_phi(double delta) const;

    FieldSeries2D& axpy(double a, const FieldSeries2D& g); // this += a*g
    FieldSeries2D& scale(double a);

    bool operator==(const FieldSeries2D& o) const { return c_ == o.c_; }

    /// iterate nonzero terms as (k, m, s, value) rows, ordered
    std::vector<std::array<double, 4>> terms() const;

private:
    static int idx(int k, int m, int s) { return (k * (kMaxFieldDegree + 1) + m) * 2 + s; }
    std::array<double, (kMaxFieldDegree + 1) * (kMaxFieldDegree + 1) * 2> c_;
};

// --- grid sign checks (sampled, not symbolic; margin declared here) ---

constexpr int kSignCheckGrid = 1000;
constexpr double kSignCheckMargin = 1e-9;

void require_positive_on_grid(const FieldSeries1D& f, const std::string& name);
void require_negative_on_grid(const FieldSeries1D& f, const std::string& name);
void require_positive_on_grid(const FieldSeries2D& f, const std::string& name);
void require_range_on_grid(const FieldSeries2D& f, double lo, double hi, const std::string& name);

} // namespace chanlab
