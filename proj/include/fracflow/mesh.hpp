#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace fracflow {

using Point = Eigen::Vector2d;

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class BoundaryTag : std::uint8_t { Bottom = 0, Top = 1, Left = 2, Right = 3 };

constexpr int kNumBoundaryTags = 4;

std::string to_string(BoundaryTag tag);
BoundaryTag boundary_tag_from_string(const std::string& name);

/// A fracture given as a polyline in physical coordinates (meters).
struct FractureSpec {
    int id = 0;
    std::vector<Point> polyline;
    double width = 0.01;
    int region = 0;
};

struct Triangle {
    std::array<int, 3> nodes{};  // counterclockwise
    int region = 0;
};

/// Oriented fracture edge: nodes[0] -> nodes[1] follows the polyline direction.
struct FractureEdge {
    std::array<int, 2> nodes{};
    int fracture = 0;
    int region = 0;
};

struct BoundaryEdge {
    std::array<int, 2> nodes{};
    BoundaryTag tag = BoundaryTag::Bottom;
};

/// Conforming triangulation of a 2D domain with an embedded fracture edge network.
/// Immutable once built; all derived adjacency is computed on construction.
class Mesh {
public:
    Mesh() = default;
    Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles,
         std::vector<FractureEdge> fracture_edges, std::vector<BoundaryEdge> boundary_edges,
         std::vector<FractureSpec> fractures = {});

    const std::vector<Point>& nodes() const { return nodes_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<FractureEdge>& fracture_edges() const { return fracture_edges_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
    const std::vector<FractureSpec>& fractures() const { return fractures_; }

    int num_nodes() const { return static_cast<int>(nodes_.size()); }
    int num_triangles() const { return static_cast<int>(triangles_.size()); }
    int num_fractures() const;

    double signed_area(int tri) const;
    Point centroid(int tri) const;

    /// Triangles sharing the (unordered) edge {a, b}.
    const std::vector<int>& edge_triangles(int a, int b) const;
    /// Triangles incident to a node.
    const std::vector<int>& node_triangles(int node) const { return node_triangles_[node]; }
    /// Fracture edges incident to a node.
    const std::vector<int>& node_fracture_edges(int node) const { return node_fracture_edges_[node]; }
    bool is_fracture_node(int node) const { return !node_fracture_edges_[node].empty(); }
    bool is_fracture_edge(int a, int b) const;
    /// Bitmask over BoundaryTag of the boundary edges touching a node.
    std::uint8_t node_boundary_mask(int node) const { return node_boundary_mask_[node]; }

    /// Bounding box: (xmin, ymin) and (xmax, ymax).
    std::pair<Point, Point> bounding_box() const;
    /// Largest triangle edge length.
    double max_edge_length() const;

private:
    static std::uint64_t edge_key(int a, int b);
    void build_adjacency();

    std::vector<Point> nodes_;
    std::vector<Triangle> triangles_;
    std::vector<FractureEdge> fracture_edges_;
    std::vector<BoundaryEdge> boundary_edges_;
    std::vector<FractureSpec> fractures_;

    std::vector<std::pair<std::uint64_t, std::vector<int>>> edge_map_;  // sorted by key
    std::vector<std::vector<int>> node_triangles_;
    std::vector<std::vector<int>> node_fracture_edges_;
    std::vector<std::uint8_t> node_boundary_mask_;
    std::vector<std::uint64_t> fracture_edge_keys_;  // sorted
};

struct StructuredMeshParams {
    double lx = 10.0;
    double ly = 20.0;
    int nx = 20;
    int ny = 40;
    std::vector<FractureSpec> fractures;
};

/// Regular triangulation of [0,lx]x[0,ly]: each grid quad is split along its
/// lower-left to upper-right diagonal. Fracture polylines must follow mesh lines.
Mesh build_structured_mesh(const StructuredMeshParams& params);

/// Returns human-readable violations of the mesh invariants; empty when valid.
std::vector<std::string> validate_mesh(const Mesh& mesh);

/// Red refinement: each triangle into four, fracture and boundary edges into two.
Mesh refine_uniform(const Mesh& mesh);

/// One oriented side of a fracture edge with its adjacent triangle.
struct SideEdge {
    int fracture_edge = 0;
    int triangle = -1;
    Point normal;  // n_a; the triangle lies on the negative side
};

struct FractureSide {
    int id = 0;        // 2*fracture (+) or 2*fracture+1 (-)
    int fracture = 0;
    bool plus = true;
    std::vector<SideEdge> edges;
};

/// Two oriented sides per fracture: #sides == 2 * #fractures.
struct GeometrySidesIndex {
    std::vector<FractureSide> sides;
    int num_fractures = 0;
};

GeometrySidesIndex side_geometry(const Mesh& mesh);

}  // namespace fracflow
