#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "shapeopt/grid.hpp"

namespace shapeopt {

/// Formats a double with enough digits to round-trip exactly.
std::string format_double(double v);

/// CSV layout: header "i,j,x,y,value", one node per line in row-major order.
void field_to_csv(const Field& f, const std::filesystem::path& path);

/// Reads a field written by field_to_csv onto the given grid. Node count,
/// index ranges and coordinates must match the grid.
Field field_from_csv(const GridPtr& grid, const std::filesystem::path& path);

/// Same layout with 0/1 values.
void mask_to_csv(const GridPtr& grid, const std::vector<std::uint8_t>& mask,
                 const std::filesystem::path& path);
std::vector<std::uint8_t> mask_from_csv(const GridPtr& grid,
                                        const std::filesystem::path& path);

/// Legacy VTK structured-points file for external viewers.
void field_to_vtk(const Field& f, const std::string& name,
                  const std::filesystem::path& path);

/// Plain "key=value" lines, one per entry.
void write_report(const std::vector<std::pair<std::string, std::string>>& entries,
                  const std::filesystem::path& path);

}  // namespace shapeopt
