#pragma once

#include <string>
#include <vector>

namespace chanlab {

inline constexpr const char* kVersion = "channel-lab 0.1.0";

/// write-through-temp-then-rename; partial files never appear under the name
void atomic_write(const std::string& path, const std::string& content);

void ensure_dir(const std::string& path);

/// one real with 17 significant digits, enough to reparse bit-exactly
std::string format_real(double v);

struct CsvSchema {
    std::vector<std::string> columns;
};

class CsvBuilder {
public:
    explicit CsvBuilder(CsvSchema schema);
    void add_row(const std::vector<double>& values);
    void add_row_raw(const std::vector<std::string>& cells);
    const std::string& text() const { return text_; }
    void write(const std::string& path) const { atomic_write(path, text_); }

private:
    CsvSchema schema_;
    std::string text_;
};

struct SvgAxes {
    double x_min, x_max, y_min, y_max;
    std::string x_label, y_label;
};

/// minimal standalone scatter plot: axis frame, ticks, one circle per point;
/// deterministic output; refuses more than 1e6 points
std::string render_svg_scatter(const std::vector<std::pair<double, double>>& points,
                               const SvgAxes& axes);

} // namespace chanlab
