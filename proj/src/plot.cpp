#include "imsmc/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>

namespace imsmc {

namespace {

constexpr double kWidth = 720.0;
constexpr double kPanel = 140.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 20.0;
constexpr double kGap = 30.0;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace

void write_svg(const CsvTable& table, const std::vector<std::string>& columns, std::ostream& out) {
    std::vector<std::size_t> picked;
    if (columns.empty()) {
        for (std::size_t i = 0; i < table.header.size(); ++i) {
            if (table.header[i] != "k") picked.push_back(i);
        }
    } else {
        for (const auto& name : columns) {
            auto it = std::find(table.header.begin(), table.header.end(), name);
            if (it == table.header.end()) {
                throw std::invalid_argument("no column named '" + name + "'");
            }
            picked.push_back(static_cast<std::size_t>(it - table.header.begin()));
        }
    }
    const double height = static_cast<double>(picked.size()) * (kPanel + kGap) + kGap;
    const std::size_t n = table.rows.size();

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    for (std::size_t p = 0; p < picked.size(); ++p) {
        const std::size_t c = picked[p];
        const double top = kGap + static_cast<double>(p) * (kPanel + kGap);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& row : table.rows) {
            if (std::isfinite(row[c])) {
                lo = std::min(lo, row[c]);
                hi = std::max(hi, row[c]);
            }
        }
        if (!(lo <= hi)) {
            lo = -1.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-12) {
            lo -= 0.5;
            hi += 0.5;
        }
        out << "<text x=\"" << kMarginLeft << "\" y=\"" << top - 6 << "\">" << table.header[c] << "</text>\n";
        out << "<rect x=\"" << kMarginLeft << "\" y=\"" << top << "\" width=\"" << plot_w << "\" height=\"" << kPanel
            << "\" fill=\"none\" stroke=\"#999\"/>\n";
        out << "<text x=\"" << kMarginLeft - 4 << "\" y=\"" << top + 10 << "\" text-anchor=\"end\">" << num(hi)
            << "</text>\n";
        out << "<text x=\"" << kMarginLeft - 4 << "\" y=\"" << top + kPanel << "\" text-anchor=\"end\">" << num(lo)
            << "</text>\n";
        if (n == 0) continue;
        out << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.2\" points=\"";
        for (std::size_t i = 0; i < n; ++i) {
            const double v = table.rows[i][c];
            if (!std::isfinite(v)) continue;
            const double px = kMarginLeft + (n > 1 ? plot_w * static_cast<double>(i) / static_cast<double>(n - 1) : 0.0);
            const double py = top + kPanel * (hi - v) / (hi - lo);
            out << num(px) << "," << num(py) << " ";
        }
        out << "\"/>\n";
    }
    out << "</svg>\n";
}

void plot_csv(const std::string& csv_path, const std::string& svg_path, const std::vector<std::string>& columns) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) {
        throw CsvError("cannot read " + csv_path);
    }
    const CsvTable table = read_table(in);
    std::ofstream out(svg_path, std::ios::binary);
    if (!out) {
        throw CsvError("cannot write " + svg_path);
    }
    write_svg(table, columns, out);
}

}  // namespace imsmc
