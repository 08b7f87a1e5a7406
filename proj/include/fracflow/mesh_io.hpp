#pragma once

#include <iosfwd>
#include <string>

#include "fracflow/mesh.hpp"

namespace fracflow {

/// Text mesh format, header line `fracflow-mesh v1`, then the sections
///
///   NODES <count>            lines: id x y
///   CELLS <count>            lines: id n1 n2 n3 region
///   FRACTURE_EDGES <count>   lines: id n1 n2 fracture_id region
///   BOUNDARY <count>         lines: edge n1 n2 tag        (tag: bottom|top|left|right)
///   FRACTURES <count>        optional; lines: id width region npoints x1 y1 ... xn yn
///
/// Ids must be 0..count-1 in order. Blank lines and lines starting with '#' are ignored.
/// Floating point values are written with 17 significant digits so files round-trip exactly.
void write_mesh(std::ostream& out, const Mesh& mesh);
void write_mesh_file(const std::string& path, const Mesh& mesh);

Mesh read_mesh(std::istream& in);
Mesh read_mesh_file(const std::string& path);

}  // namespace fracflow
