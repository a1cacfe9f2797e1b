#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "todalab/toda.hpp"

namespace todalab::io {

// A solution directory holds meta.json (config echo + solver record) and one
// CSV per field (u_1.csv, ...), row-major with a geometry header. Field
// weights additionally persist phi.csv. Writes are atomic (tmp + rename).
void save_solution(const std::filesystem::path& dir, const toda::GridSolution& sol);
toda::GridSolution load_solution(const std::filesystem::path& dir);

void write_file_atomic(const std::filesystem::path& path, const std::string& content);

// Doubles formatted with %.17g so written values reload bit-exact.
std::string format_double(double v);

} // namespace todalab::io
