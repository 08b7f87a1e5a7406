#pragma once

#include <cstdint>
#include <functional>

#include "fracflow/gdm.hpp"
#include "fracflow/mesh.hpp"

namespace fracflow {

constexpr std::uint8_t tag_bit(BoundaryTag tag) { return static_cast<std::uint8_t>(1u << static_cast<int>(tag)); }

inline constexpr std::uint8_t kTopBottom = tag_bit(BoundaryTag::Bottom) | tag_bit(BoundaryTag::Top);
inline constexpr std::uint8_t kAllBoundaries = 0x0F;

/// Fraction 1/sqrt(6) of the way from a vertex to the opposite edge bounds the vertex
/// volume of a regular node: the corner {lambda_i >= 1 - rho} has area |K|/6.
inline constexpr double kCornerRho = 0.40824829046386301637;

/// VAG discretisation of a fractured triangulation. DOFs: regular nodes, one matrix
/// sector DOF per side-connected fan at each fracture node, fracture nodes, cells (last).
/// DOFs located on boundaries listed in `dirichlet_tags` are excluded from X0.
GradientDiscretisation build_vag(const Mesh& mesh, std::uint8_t dirichlet_tags = kTopBottom);

/// One-sided matrix value at a fracture node: receives the node and a point inside the sector.
using TraceInterpolant = std::function<double(const Point& node, const Point& inside)>;

/// Nodal / centroid interpolation of initial data. Sector DOFs use `trace` when given,
/// otherwise the value of p_m at the node.
Vector interpolate_initial(const GradientDiscretisation& gd, const std::function<double(const Point&)>& p_m,
                           const std::function<double(const Point&)>& p_f, const TraceInterpolant& trace = {});

/// Point inside the fan of a sector DOF, half way between the node and the mean centroid
/// of the fan's sub-triangles.
Point sector_inside_point(const GradientDiscretisation& gd, int dof);

}  // namespace fracflow
