#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "imsmc/experiment.hpp"

namespace imsmc {

class CsvError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Column names in file order: k, x_*, u_*, s_*, s_norm, l_*, g_next_* (row
// major), mu0, varpi_hat_*, residual_norm, omega, in_band, clamped, fallback,
// delta_x_*, delta_u_*, y_*.
std::vector<std::string> csv_header(const TrajectoryLog& log);

// %.17g numbers, 0/1 flags, LF line endings.
void write_csv(const TrajectoryLog& log, std::ostream& out);
void export_csv(const TrajectoryLog& log, const std::string& path);

TrajectoryLog read_csv(std::istream& in);
TrajectoryLog import_csv(const std::string& path);

// Raw numeric table, used by the plotter.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable read_table(std::istream& in);

}  // namespace imsmc
