#include "fracflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace fracflow {

std::string to_string(BoundaryTag tag)
{
    switch (tag) {
    case BoundaryTag::Bottom: return "bottom";
    case BoundaryTag::Top: return "top";
    case BoundaryTag::Left: return "left";
    case BoundaryTag::Right: return "right";
    }
    return "unknown";
}

BoundaryTag boundary_tag_from_string(const std::string& name)
{
    if (name == "bottom") return BoundaryTag::Bottom;
    if (name == "top") return BoundaryTag::Top;
    if (name == "left") return BoundaryTag::Left;
    if (name == "right") return BoundaryTag::Right;
    throw MeshError("unknown boundary tag '" + name + "'");
}

Mesh::Mesh(std::vector<Point> nodes, std::vector<Triangle> triangles,
           std::vector<FractureEdge> fracture_edges, std::vector<BoundaryEdge> boundary_edges,
           std::vector<FractureSpec> fractures)
    : nodes_(std::move(nodes)),
      triangles_(std::move(triangles)),
      fracture_edges_(std::move(fracture_edges)),
      boundary_edges_(std::move(boundary_edges)),
      fractures_(std::move(fractures))
{
    const int n = num_nodes();
    auto check = [n](int v, const char* what) {
        if (v < 0 || v >= n) {
            throw MeshError(std::string(what) + " references node " + std::to_string(v) +
                            " outside [0," + std::to_string(n) + ")");
        }
    };
    for (const auto& t : triangles_)
        for (int v : t.nodes) check(v, "triangle");
    for (const auto& e : fracture_edges_)
        for (int v : e.nodes) check(v, "fracture edge");
    for (const auto& e : boundary_edges_)
        for (int v : e.nodes) check(v, "boundary edge");
    build_adjacency();
}

std::uint64_t Mesh::edge_key(int a, int b)
{
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

void Mesh::build_adjacency()
{
    node_triangles_.assign(nodes_.size(), {});
    node_fracture_edges_.assign(nodes_.size(), {});
    node_boundary_mask_.assign(nodes_.size(), 0);

    std::map<std::uint64_t, std::vector<int>> edges;
    for (int t = 0; t < num_triangles(); ++t) {
        const auto& tri = triangles_[t].nodes;
        for (int k = 0; k < 3; ++k) {
            node_triangles_[tri[k]].push_back(t);
            edges[edge_key(tri[k], tri[(k + 1) % 3])].push_back(t);
        }
    }
    edge_map_.assign(edges.begin(), edges.end());

    fracture_edge_keys_.clear();
    for (int e = 0; e < static_cast<int>(fracture_edges_.size()); ++e) {
        const auto& fe = fracture_edges_[e];
        node_fracture_edges_[fe.nodes[0]].push_back(e);
        node_fracture_edges_[fe.nodes[1]].push_back(e);
        fracture_edge_keys_.push_back(edge_key(fe.nodes[0], fe.nodes[1]));
    }
    std::sort(fracture_edge_keys_.begin(), fracture_edge_keys_.end());

    for (const auto& be : boundary_edges_) {
        const auto bit = static_cast<std::uint8_t>(1u << static_cast<unsigned>(be.tag));
        node_boundary_mask_[be.nodes[0]] |= bit;
        node_boundary_mask_[be.nodes[1]] |= bit;
    }
}

int Mesh::num_fractures() const
{
    int n = static_cast<int>(fractures_.size());
    for (const auto& e : fracture_edges_) n = std::max(n, e.fracture + 1);
    return n;
}

double Mesh::signed_area(int tri) const
{
    const auto& t = triangles_[tri].nodes;
    const Point a = nodes_[t[1]] - nodes_[t[0]];
    const Point b = nodes_[t[2]] - nodes_[t[0]];
    return 0.5 * (a.x() * b.y() - a.y() * b.x());
}

Point Mesh::centroid(int tri) const
{
    const auto& t = triangles_[tri].nodes;
    return (nodes_[t[0]] + nodes_[t[1]] + nodes_[t[2]]) / 3.0;
}

const std::vector<int>& Mesh::edge_triangles(int a, int b) const
{
    static const std::vector<int> empty;
    const auto key = edge_key(a, b);
    auto it = std::lower_bound(edge_map_.begin(), edge_map_.end(), key,
                               [](const auto& entry, std::uint64_t k) { return entry.first < k; });
    if (it == edge_map_.end() || it->first != key) return empty;
    return it->second;
}

bool Mesh::is_fracture_edge(int a, int b) const
{
    return std::binary_search(fracture_edge_keys_.begin(), fracture_edge_keys_.end(), edge_key(a, b));
}

std::pair<Point, Point> Mesh::bounding_box() const
{
    Point lo(std::numeric_limits<double>::max(), std::numeric_limits<double>::max());
    Point hi = -lo;
    for (const auto& p : nodes_) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    return {lo, hi};
}

double Mesh::max_edge_length() const
{
    double h = 0.0;
    for (const auto& [key, tris] : edge_map_) {
        const int a = static_cast<int>(key >> 32);
        const int b = static_cast<int>(key & 0xffffffffu);
        h = std::max(h, (nodes_[a] - nodes_[b]).norm());
    }
    return h;
}

// ---------------------------------------------------------------------------
// Structured generator
// ---------------------------------------------------------------------------

namespace {

bool on_segment(const Point& p, const Point& a, const Point& b, double tol)
{
    const Point ab = b - a;
    const double len = ab.norm();
    const Point ap = p - a;
    const double cross = ab.x() * ap.y() - ab.y() * ap.x();
    if (std::abs(cross) > tol * len) return false;
    const double s = ap.dot(ab) / (len * len);
    return s > -tol / len && s < 1.0 + tol / len;
}

}  // namespace

Mesh build_structured_mesh(const StructuredMeshParams& params)
{
    const int nx = params.nx;
    const int ny = params.ny;
    if (nx < 2 || ny < 2) throw MeshError("structured mesh needs nx, ny >= 2");
    if (!(params.lx > 0.0) || !(params.ly > 0.0)) throw MeshError("domain extent must be positive");

    const double hx = params.lx / nx;
    const double hy = params.ly / ny;
    auto node_id = [nx](int i, int j) { return j * (nx + 1) + i; };

    std::vector<Point> nodes;
    nodes.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            nodes.emplace_back(i * hx, j * hy);

    std::vector<Triangle> triangles;
    triangles.reserve(static_cast<std::size_t>(2 * nx * ny));
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const int a = node_id(i, j), b = node_id(i + 1, j);
            const int c = node_id(i + 1, j + 1), d = node_id(i, j + 1);
            triangles.push_back({{a, b, c}, 0});
            triangles.push_back({{a, c, d}, 0});
        }
    }

    std::vector<BoundaryEdge> boundary;
    for (int i = 0; i < nx; ++i) {
        boundary.push_back({{node_id(i, 0), node_id(i + 1, 0)}, BoundaryTag::Bottom});
        boundary.push_back({{node_id(i + 1, ny), node_id(i, ny)}, BoundaryTag::Top});
    }
    for (int j = 0; j < ny; ++j) {
        boundary.push_back({{node_id(0, j + 1), node_id(0, j)}, BoundaryTag::Left});
        boundary.push_back({{node_id(nx, j), node_id(nx, j + 1)}, BoundaryTag::Right});
    }

    // Node-to-node adjacency through triangle edges, used to walk fracture segments.
    std::vector<std::vector<int>> neighbours(nodes.size());
    for (const auto& t : triangles) {
        for (int k = 0; k < 3; ++k) {
            const int u = t.nodes[k], v = t.nodes[(k + 1) % 3];
            neighbours[u].push_back(v);
            neighbours[v].push_back(u);
        }
    }

    const double snap_tol = 1e-9 * std::min(hx, hy);
    auto snap = [&](const Point& p) -> int {
        const double fi = p.x() / hx, fj = p.y() / hy;
        const int i = static_cast<int>(std::lround(fi));
        const int j = static_cast<int>(std::lround(fj));
        if (i < 0 || i > nx || j < 0 || j > ny ||
            (nodes[node_id(i, j)] - p).norm() > snap_tol) {
            std::ostringstream msg;
            msg << "fracture point (" << p.x() << ", " << p.y()
                << ") is not a node of the " << nx << "x" << ny << " grid";
            throw MeshError(msg.str());
        }
        return node_id(i, j);
    };

    std::vector<FractureEdge> fracture_edges;
    std::vector<FractureSpec> fractures = params.fractures;
    for (std::size_t f = 0; f < fractures.size(); ++f) {
        auto& spec = fractures[f];
        spec.id = static_cast<int>(f);
        if (spec.polyline.size() < 2) throw MeshError("fracture needs at least two points");
        if (!(spec.width > 0.0)) throw MeshError("fracture width must be positive");
        for (std::size_t s = 0; s + 1 < spec.polyline.size(); ++s) {
            const int start = snap(spec.polyline[s]);
            const int end = snap(spec.polyline[s + 1]);
            if (start == end) throw MeshError("degenerate fracture segment");
            const Point a = nodes[start], b = nodes[end];
            const Point dir = (b - a).normalized();
            int cur = start;
            while (cur != end) {
                int next = -1;
                double best = 0.0;
                for (int v : neighbours[cur]) {
                    if (!on_segment(nodes[v], a, b, snap_tol)) continue;
                    const double adv = (nodes[v] - nodes[cur]).dot(dir);
                    if (adv > snap_tol && (next < 0 || adv < best)) {
                        next = v;
                        best = adv;
                    }
                }
                if (next < 0) {
                    std::ostringstream msg;
                    msg << "fracture " << f << " segment " << s
                        << " does not follow mesh edges at this resolution (nx=" << nx
                        << ", ny=" << ny << ")";
                    throw MeshError(msg.str());
                }
                fracture_edges.push_back({{cur, next}, static_cast<int>(f), spec.region});
                cur = next;
            }
        }
    }

    return Mesh(std::move(nodes), std::move(triangles), std::move(fracture_edges),
                std::move(boundary), std::move(fractures));
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

std::vector<std::string> validate_mesh(const Mesh& mesh)
{
    std::vector<std::string> violations;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const double area = mesh.signed_area(t);
        if (area < 0.0) {
            violations.push_back("negative area at cell " + std::to_string(t));
        } else if (area == 0.0 || !std::isfinite(area)) {
            violations.push_back("degenerate area at cell " + std::to_string(t));
        }
    }

    // Triangle edges: at most two triangles; single-triangle edges must be boundary edges.
    std::map<std::uint64_t, int> boundary_count;
    for (const auto& be : mesh.boundary_edges()) {
        const auto [a, b] = std::minmax(be.nodes[0], be.nodes[1]);
        boundary_count[(static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b)]++;
        if (mesh.edge_triangles(a, b).size() != 1) {
            violations.push_back("boundary edge (" + std::to_string(a) + "," + std::to_string(b) +
                                 ") is not on the mesh boundary");
        }
    }
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& nd = mesh.triangles()[t].nodes;
        for (int k = 0; k < 3; ++k) {
            const auto [a, b] = std::minmax(nd[k], nd[(k + 1) % 3]);
            const auto n = mesh.edge_triangles(a, b).size();
            const std::string edge = "(" + std::to_string(a) + "," + std::to_string(b) + ")";
            if (n > 2) {
                violations.push_back("non-manifold edge " + edge + " shared by " +
                                     std::to_string(n) + " triangles");
            } else if (n == 1 && !boundary_count.count((static_cast<std::uint64_t>(a) << 32) |
                                                         static_cast<std::uint32_t>(b))) {
                violations.push_back("untagged boundary edge " + edge);
            }
        }
    }

    for (int e = 0; e < static_cast<int>(mesh.fracture_edges().size()); ++e) {
        const auto& fe = mesh.fracture_edges()[e];
        const auto& tris = mesh.edge_triangles(fe.nodes[0], fe.nodes[1]);
        if (tris.empty()) {
            violations.push_back("fracture edge " + std::to_string(e) + " is not a mesh edge");
        } else if (tris.size() > 2) {
            violations.push_back("non-manifold fracture edge " + std::to_string(e) + " adjacent to " +
                                 std::to_string(tris.size()) + " triangles");
        } else if (tris.size() == 1) {
            const auto bmask = mesh.node_boundary_mask(fe.nodes[0]) & mesh.node_boundary_mask(fe.nodes[1]);
            if (bmask == 0) {
                violations.push_back("fracture edge " + std::to_string(e) +
                                     " has a single adjacent triangle away from the boundary");
            }
        }
        if (fe.fracture < 0) violations.push_back("fracture edge " + std::to_string(e) + " has no fracture id");
    }

    for (std::size_t f = 0; f < mesh.fractures().size(); ++f) {
        if (!(mesh.fractures()[f].width > 0.0))
            violations.push_back("fracture " + std::to_string(f) + " has non-positive width");
    }
    return violations;
}

// ---------------------------------------------------------------------------
// Uniform refinement
// ---------------------------------------------------------------------------

Mesh refine_uniform(const Mesh& mesh)
{
    std::vector<Point> nodes = mesh.nodes();
    std::map<std::uint64_t, int> midpoint;
    auto mid = [&](int a, int b) {
        const auto [lo, hi] = std::minmax(a, b);
        const auto key = (static_cast<std::uint64_t>(lo) << 32) | static_cast<std::uint32_t>(hi);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const int id = static_cast<int>(nodes.size());
        nodes.push_back(0.5 * (mesh.nodes()[a] + mesh.nodes()[b]));
        midpoint.emplace(key, id);
        return id;
    };

    std::vector<Triangle> triangles;
    triangles.reserve(4 * mesh.triangles().size());
    for (const auto& t : mesh.triangles()) {
        const int a = t.nodes[0], b = t.nodes[1], c = t.nodes[2];
        const int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
        triangles.push_back({{a, ab, ca}, t.region});
        triangles.push_back({{ab, b, bc}, t.region});
        triangles.push_back({{ca, bc, c}, t.region});
        triangles.push_back({{ab, bc, ca}, t.region});
    }

    std::vector<FractureEdge> fracture_edges;
    for (const auto& fe : mesh.fracture_edges()) {
        const int m = mid(fe.nodes[0], fe.nodes[1]);
        fracture_edges.push_back({{fe.nodes[0], m}, fe.fracture, fe.region});
        fracture_edges.push_back({{m, fe.nodes[1]}, fe.fracture, fe.region});
    }

    std::vector<BoundaryEdge> boundary;
    for (const auto& be : mesh.boundary_edges()) {
        const int m = mid(be.nodes[0], be.nodes[1]);
        boundary.push_back({{be.nodes[0], m}, be.tag});
        boundary.push_back({{m, be.nodes[1]}, be.tag});
    }

    return Mesh(std::move(nodes), std::move(triangles), std::move(fracture_edges),
                std::move(boundary), mesh.fractures());
}

// ---------------------------------------------------------------------------
// Side geometry
// ---------------------------------------------------------------------------

GeometrySidesIndex side_geometry(const Mesh& mesh)
{
    GeometrySidesIndex index;
    index.num_fractures = mesh.num_fractures();
    index.sides.resize(2 * static_cast<std::size_t>(index.num_fractures));
    for (int f = 0; f < index.num_fractures; ++f) {
        index.sides[2 * f] = {2 * f, f, true, {}};
        index.sides[2 * f + 1] = {2 * f + 1, f, false, {}};
    }

    for (int e = 0; e < static_cast<int>(mesh.fracture_edges().size()); ++e) {
        const auto& fe = mesh.fracture_edges()[e];
        const Point p0 = mesh.nodes()[fe.nodes[0]];
        const Point p1 = mesh.nodes()[fe.nodes[1]];
        const Point t = (p1 - p0).normalized();
        const Point left(-t.y(), t.x());
        const Point midpoint = 0.5 * (p0 + p1);
        const auto& tris = mesh.edge_triangles(fe.nodes[0], fe.nodes[1]);
        if (tris.empty()) {
            throw MeshError("dangling fracture edge " + std::to_string(e) + " with no adjacent triangle");
        }
        for (int tri : tris) {
            const double side = (mesh.centroid(tri) - midpoint).dot(left);
            // n_{a+} = left normal; its matrix side lies on the negative side (right of the edge).
            if (side < 0.0) {
                index.sides[2 * fe.fracture].edges.push_back({e, tri, left});
            } else {
                index.sides[2 * fe.fracture + 1].edges.push_back({e, tri, -left});
            }
        }
    }
    return index;
}

}  // namespace fracflow
