#include "chanlab/artifacts.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace chanlab {

void ensure_dir(const std::string& path) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw std::runtime_error("cannot create directory " + path + ": " + ec.message());
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::filesystem::path target(path);
    if (target.has_parent_path()) ensure_dir(target.parent_path().string());
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp);
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("short write to " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw std::runtime_error("cannot rename " + tmp + ": " + ec.message());
}

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvBuilder::CsvBuilder(CsvSchema schema) : schema_(std::move(schema)) {
    for (size_t i = 0; i < schema_.columns.size(); ++i) {
        if (i) text_ += ',';
        text_ += schema_.columns[i];
    }
    text_ += "\r\n";
}

void CsvBuilder::add_row(const std::vector<double>& values) {
    if (values.size() != schema_.columns.size())
        throw std::invalid_argument("CsvBuilder: row width does not match the schema");
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) text_ += ',';
        text_ += format_real(values[i]);
    }
    text_ += "\r\n";
}

void CsvBuilder::add_row_raw(const std::vector<std::string>& cells) {
    if (cells.size() != schema_.columns.size())
        throw std::invalid_argument("CsvBuilder: row width does not match the schema");
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) text_ += ',';
        text_ += cells[i];
    }
    text_ += "\r\n";
}

std::string render_svg_scatter(const std::vector<std::pair<double, double>>& points,
                               const SvgAxes& axes) {
    if (points.size() > 1000000)
        throw std::invalid_argument("render_svg_scatter: too many points, use CSV output");
    if (!(axes.x_max > axes.x_min) || !(axes.y_max > axes.y_min))
        throw std::invalid_argument("render_svg_scatter: invalid axis range");

    const double w = 640, hgt = 480, margin = 50;
    auto px = [&](double x) {
        return margin + (x - axes.x_min) / (axes.x_max - axes.x_min) * (w - 2 * margin);
    };
    auto py = [&](double y) {
        return hgt - margin - (y - axes.y_min) / (axes.y_max - axes.y_min) * (hgt - 2 * margin);
    };

    std::string s;
    char buf[256];
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    std::snprintf(buf, sizeof(buf),
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\" "
                  "viewBox=\"0 0 %.0f %.0f\">\n",
                  w, hgt, w, hgt);
    s += buf;
    std::snprintf(buf, sizeof(buf),
                  "<rect x=\"%.0f\" y=\"%.0f\" width=\"%.0f\" height=\"%.0f\" fill=\"none\" "
                  "stroke=\"black\"/>\n",
                  margin, margin, w - 2 * margin, hgt - 2 * margin);
    s += buf;
    for (int i = 0; i <= 4; ++i) {
        const double fx = axes.x_min + (axes.x_max - axes.x_min) * i / 4.0;
        const double fy = axes.y_min + (axes.y_max - axes.y_min) * i / 4.0;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"10\" text-anchor=\"middle\">%.6g"
                      "</text>\n",
                      px(fx), hgt - margin + 16, fx);
        s += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"10\" text-anchor=\"end\">%.6g"
                      "</text>\n",
                      margin - 6, py(fy) + 3, fy);
        s += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.1f\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\">%s</text>\n",
                  w / 2, hgt - 12, axes.x_label.c_str());
    s += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"14\" y=\"%.1f\" font-size=\"12\" text-anchor=\"middle\" "
                  "transform=\"rotate(-90 14 %.1f)\">%s</text>\n",
                  hgt / 2, hgt / 2, axes.y_label.c_str());
    s += buf;
    for (const auto& pt : points) {
        std::snprintf(buf, sizeof(buf), "<circle cx=\"%.6g\" cy=\"%.6g\" r=\"2\"/>\n",
                      px(pt.first), py(pt.second));
        s += buf;
    }
    s += "</svg>\n";
    return s;
}

} // namespace chanlab
