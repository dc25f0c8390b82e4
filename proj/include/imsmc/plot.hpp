#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "imsmc/csv.hpp"

namespace imsmc {

// One line chart per selected column (all but k when `columns` is empty),
// stacked vertically in a single SVG, x axis = k.
void write_svg(const CsvTable& table, const std::vector<std::string>& columns, std::ostream& out);

void plot_csv(const std::string& csv_path, const std::string& svg_path, const std::vector<std::string>& columns = {});

}  // namespace imsmc
