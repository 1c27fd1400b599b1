#pragma once

#include "esa/surface.hpp"

#include <filesystem>
#include <span>
#include <string>

namespace esa {

enum class SurfaceFormat { Json, Binary };

/// Reads a surface file. The format is detected from the leading bytes:
/// the binary variant starts with the 8-byte magic "ESASURF1".
Surface load_surface(const std::filesystem::path& path);

void save_surface(const Surface& f, const std::filesystem::path& path,
                  SurfaceFormat format = SurfaceFormat::Json);

/// Writes a triangulated OBJ: one vertex per node in node order, two
/// triangles per grid quad (u wraps), and a fan over each pole ring.
void export_obj(const Surface& f, const std::filesystem::path& path);

/// Number of triangles export_obj writes for a grid.
int obj_triangle_count(const SphericalGrid& grid);

/// Per-node scalar sidecar: node,i_u,j_v,theta,phi,value.
void write_node_scalars_csv(const SphericalGrid& grid, std::span<const double> values,
                            const std::string& column, const std::filesystem::path& path);

} // namespace esa
