#include "imsmc/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace imsmc {

namespace {

void add_indexed(std::vector<std::string>& h, const std::string& stem, Index n) {
    for (Index i = 0; i < n; ++i) {
        h.push_back(stem + "_" + std::to_string(i));
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) {
        out.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_double(const std::string& cell, std::size_t line) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw CsvError("line " + std::to_string(line) + ": not a number: '" + cell + "'");
    }
    return v;
}

Index count_prefix(const std::vector<std::string>& header, const std::string& stem) {
    Index n = 0;
    while (true) {
        const std::string name = stem + "_" + std::to_string(n);
        bool found = false;
        for (const auto& h : header) {
            if (h == name) {
                found = true;
                break;
            }
        }
        if (!found) {
            return n;
        }
        ++n;
    }
}

}  // namespace

std::vector<std::string> csv_header(const TrajectoryLog& log) {
    std::vector<std::string> h{"k"};
    add_indexed(h, "x", log.nx);
    add_indexed(h, "u", log.nu);
    add_indexed(h, "s", log.nu);
    h.push_back("s_norm");
    add_indexed(h, "l", log.window);
    add_indexed(h, "g_next", log.nu * log.n1());
    h.push_back("mu0");
    add_indexed(h, "varpi_hat", log.nu);
    h.push_back("residual_norm");
    h.push_back("omega");
    h.push_back("in_band");
    h.push_back("clamped");
    h.push_back("fallback");
    add_indexed(h, "delta_x", log.nx);
    add_indexed(h, "delta_u", log.nu);
    add_indexed(h, "y", log.ny);
    return h;
}

void write_csv(const TrajectoryLog& log, std::ostream& out) {
    const auto header = csv_header(log);
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << header[i];
    }
    out << '\n';
    for (const auto& r : log.rows) {
        std::string line = std::to_string(r.k);
        const auto put = [&line](double v) {
            line += ',';
            line += fmt(v);
        };
        const auto put_vec = [&put](const Vector& v) {
            for (Index i = 0; i < v.size(); ++i) put(v(i));
        };
        const auto put_flag = [&line](bool b) { line += b ? ",1" : ",0"; };
        put_vec(r.x);
        put_vec(r.u);
        put_vec(r.s);
        put(r.s_norm);
        put_vec(r.l);
        for (Index i = 0; i < r.g_next.rows(); ++i) {
            for (Index j = 0; j < r.g_next.cols(); ++j) put(r.g_next(i, j));
        }
        put(r.mu0);
        put_vec(r.varpi_hat);
        put(r.residual_norm);
        put(r.omega);
        put_flag(r.in_band);
        put_flag(r.clamped);
        put_flag(r.fallback);
        put_vec(r.delta_x);
        put_vec(r.delta_u);
        put_vec(r.y);
        out << line << '\n';
    }
}

void export_csv(const TrajectoryLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw CsvError("cannot write " + path);
    }
    write_csv(log, out);
    if (!out) {
        throw CsvError("write failed for " + path);
    }
}

CsvTable read_table(std::istream& in) {
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) {
        throw CsvError("empty CSV");
    }
    t.header = split(line);
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != t.header.size()) {
            throw CsvError("line " + std::to_string(line_no) + ": expected " + std::to_string(t.header.size()) +
                           " columns, got " + std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) row.push_back(parse_double(c, line_no));
        t.rows.push_back(std::move(row));
    }
    return t;
}

TrajectoryLog read_csv(std::istream& in) {
    const CsvTable t = read_table(in);
    TrajectoryLog log;
    log.nx = count_prefix(t.header, "x");
    log.nu = count_prefix(t.header, "u");
    log.window = count_prefix(t.header, "l");
    log.ny = count_prefix(t.header, "y");
    if (csv_header(log) != t.header) {
        throw CsvError("header does not match the trajectory schema");
    }
    const Index n1 = log.n1();
    for (const auto& v : t.rows) {
        std::size_t c = 0;
        const auto take = [&]() { return v[c++]; };
        const auto take_vec = [&](Index n) {
            Vector out(n);
            for (Index i = 0; i < n; ++i) out(i) = take();
            return out;
        };
        LogRow r;
        r.k = static_cast<StepIndex>(take());
        r.x = take_vec(log.nx);
        r.u = take_vec(log.nu);
        r.s = take_vec(log.nu);
        r.s_norm = take();
        r.l = take_vec(log.window);
        r.g_next.resize(log.nu, n1);
        for (Index i = 0; i < log.nu; ++i) {
            for (Index j = 0; j < n1; ++j) r.g_next(i, j) = take();
        }
        r.mu0 = take();
        r.varpi_hat = take_vec(log.nu);
        r.residual_norm = take();
        r.omega = take();
        r.in_band = take() != 0.0;
        r.clamped = take() != 0.0;
        r.fallback = take() != 0.0;
        r.delta_x = take_vec(log.nx);
        r.delta_u = take_vec(log.nu);
        r.y = take_vec(log.ny);
        log.rows.push_back(std::move(r));
    }
    return log;
}

TrajectoryLog import_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CsvError("cannot read " + path);
    }
    return read_csv(in);
}

}  // namespace imsmc
