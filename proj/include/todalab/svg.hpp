#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "todalab/grid.hpp"

namespace todalab::io {

// Static heatmap of a nodewise field: one rect per node, linear color scale
// with an embedded legend. NaN nodes are left blank. Output bytes are a pure
// function of the inputs.
void write_heatmap_svg(const std::filesystem::path& path, const Grid2D& grid,
                       const std::vector<double>& values, const std::string& title);

} // namespace todalab::io
