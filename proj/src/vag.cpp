#include "fracflow/vag.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <string>

namespace fracflow {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x)
    {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b)
    {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

// Gradients of the barycentric coordinates of a counterclockwise triangle.
std::array<Point, 3> barycentric_gradients(const Point& x0, const Point& x1, const Point& x2)
{
    const double twice = cross(x1 - x0, x2 - x0);
    auto g = [&](const Point& a, const Point& b) -> Point {
        const Point e = b - a;
        return Point(-e.y(), e.x()) / twice;
    };
    return {g(x1, x2), g(x2, x0), g(x0, x1)};
}

}  // namespace

GradientDiscretisation build_vag(const Mesh& mesh, std::uint8_t dirichlet_tags)
{
    const auto violations = validate_mesh(mesh);
    if (!violations.empty()) throw MeshError("invalid mesh: " + violations.front());
    const GeometrySidesIndex sides = side_geometry(mesh);

    GradientDiscretisation gd;
    gd.num_fractures = mesh.num_fractures();
    gd.num_sides = static_cast<int>(sides.sides.size());
    auto add_dof = [&](DofKind kind, int entity, const Point& x, std::uint8_t mask) {
        gd.kind.push_back(kind);
        gd.entity.push_back(entity);
        gd.position.push_back(x);
        gd.boundary_mask.push_back(mask);
        return gd.num_dofs++;
    };

    // node-type DOFs in node order
    std::vector<int> node_dof(mesh.num_nodes(), -1), fracture_dof(mesh.num_nodes(), -1);
    std::map<std::pair<int, int>, int> sector_of;  // (node, triangle) -> DOF
    for (int n = 0; n < mesh.num_nodes(); ++n) {
        const Point& x = mesh.nodes()[n];
        const auto mask = mesh.node_boundary_mask(n);
        if (!mesh.is_fracture_node(n)) {
            node_dof[n] = add_dof(DofKind::Node, n, x, mask);
            continue;
        }
        const auto& tris = mesh.node_triangles(n);
        if (tris.empty()) throw MeshError("isolated fracture node " + std::to_string(n));
        UnionFind uf(static_cast<int>(tris.size()));
        auto local = [&](int tri) { return static_cast<int>(std::find(tris.begin(), tris.end(), tri) - tris.begin()); };
        for (std::size_t a = 0; a < tris.size(); ++a)
            for (int m : mesh.triangles()[tris[a]].nodes) {
                if (m == n || mesh.is_fracture_edge(n, m)) continue;
                for (int other : mesh.edge_triangles(n, m)) uf.unite(static_cast<int>(a), local(other));
            }
        std::map<int, int> root_dof;
        for (std::size_t a = 0; a < tris.size(); ++a) {
            const int root = uf.find(static_cast<int>(a));
            auto it = root_dof.find(root);
            if (it == root_dof.end()) it = root_dof.emplace(root, add_dof(DofKind::Sector, n, x, mask)).first;
            sector_of[{n, tris[a]}] = it->second;
        }
        fracture_dof[n] = add_dof(DofKind::Fracture, n, x, mask);
    }
    std::vector<int> cell_dof(mesh.num_triangles());
    for (int t = 0; t < mesh.num_triangles(); ++t) cell_dof[t] = add_dof(DofKind::Cell, t, mesh.centroid(t), 0);

    auto vertex_dof = [&](int node, int tri) { return node_dof[node] >= 0 ? node_dof[node] : sector_of.at({node, tri}); };

    // matrix pieces and parts
    const double rho = kCornerRho;
    for (int t = 0; t < mesh.num_triangles(); ++t) {
        const auto& tri = mesh.triangles()[t];
        std::array<Point, 3> s;
        std::array<int, 3> vd;
        std::array<bool, 3> corner;
        for (int i = 0; i < 3; ++i) {
            s[i] = mesh.nodes()[tri.nodes[i]];
            vd[i] = vertex_dof(tri.nodes[i], t);
            corner[i] = gd.kind[vd[i]] == DofKind::Node;
        }
        const Point g = mesh.centroid(t);
        const double area = mesh.signed_area(t);
        const auto bary = barycentric_gradients(s[0], s[1], s[2]);
        for (int i = 0; i < 3; ++i) {
            const int j = (i + 1) % 3;
            MatrixPiece piece;
            piece.vertices = {g, s[i], s[j]};
            piece.area = area / 3.0;
            piece.triangle = t;
            piece.region = tri.region;
            piece.dofs = {cell_dof[t], vd[i], vd[j]};
            piece.grad = barycentric_gradients(g, s[i], s[j]);
            piece.part_begin = static_cast<int>(gd.matrix_parts.size());
            const int pidx = static_cast<int>(gd.matrix.size());
            Polygon cell_poly{g, s[i], s[j]};
            double cell_measure = piece.area;
            for (int v : {i, j}) {
                if (!corner[v]) continue;
                const int opp = v == i ? j : i;  // other vertex of this piece
                const int third = 3 - i - j;     // vertex not in this piece
                const Point tip1 = s[v] + rho * (s[opp] - s[v]);
                const Point tip2 = s[v] + 0.5 * rho * (s[opp] + s[third] - 2.0 * s[v]);
                Polygon poly = v == i ? Polygon{s[v], tip1, tip2} : Polygon{s[v], tip2, tip1};
                if (polygon_area(poly) < 0.0) std::reverse(poly.begin(), poly.end());
                gd.matrix_parts.push_back({vd[v], tri.region, pidx, area / 12.0, poly});
                cell_measure -= area / 12.0;
                // lambda_v <= 1 - rho, with lambda_v(x) = bary[v] . (x - s[opp])
                cell_poly = clip_halfplane(cell_poly, bary[v], 1.0 - rho + bary[v].dot(s[opp]));
            }
            gd.matrix_parts.push_back({cell_dof[t], tri.region, pidx, cell_measure, cell_poly});
            piece.part_end = static_cast<int>(gd.matrix_parts.size());
            gd.matrix.push_back(piece);
        }
        gd.domain_area += area;
    }

    // fracture pieces
    const auto& specs = mesh.fractures();
    for (int e = 0; e < static_cast<int>(mesh.fracture_edges().size()); ++e) {
        const auto& fe = mesh.fracture_edges()[e];
        FracturePiece piece;
        piece.dofs = {fracture_dof[fe.nodes[0]], fracture_dof[fe.nodes[1]]};
        piece.ends = {mesh.nodes()[fe.nodes[0]], mesh.nodes()[fe.nodes[1]]};
        piece.length = (piece.ends[1] - piece.ends[0]).norm();
        piece.tangent = (piece.ends[1] - piece.ends[0]) / piece.length;
        piece.width = fe.fracture < static_cast<int>(specs.size()) ? specs[fe.fracture].width : 0.01;
        piece.fracture = fe.fracture;
        piece.region = fe.region;
        piece.edge = e;
        gd.fracture.push_back(piece);
        gd.fracture_parts.push_back({piece.dofs[0], e, 0.0, 0.5 * piece.length});
        gd.fracture_parts.push_back({piece.dofs[1], e, 0.5 * piece.length, piece.length});
    }

    // interface half-edges
    for (const auto& side : sides.sides)
        for (const auto& se : side.edges) {
            const auto& fe = mesh.fracture_edges()[se.fracture_edge];
            const auto& piece = gd.fracture[se.fracture_edge];
            for (int h = 0; h < 2; ++h) {
                InterfacePiece ip;
                ip.side = side.id;
                ip.trace_dof = vertex_dof(fe.nodes[h], se.triangle);
                ip.fracture_dof = fracture_dof[fe.nodes[h]];
                ip.fracture_piece = se.fracture_edge;
                ip.triangle = se.triangle;
                ip.matrix_region = mesh.triangles()[se.triangle].region;
                ip.s0 = h == 0 ? 0.0 : 0.5 * piece.length;
                ip.s1 = h == 0 ? 0.5 * piece.length : piece.length;
                ip.normal = se.normal;
                gd.interface.push_back(ip);
            }
        }

    gd.dirichlet.resize(gd.num_dofs);
    for (int i = 0; i < gd.num_dofs; ++i) gd.dirichlet[i] = (gd.boundary_mask[i] & dirichlet_tags) ? 1 : 0;
    return gd;
}

Point sector_inside_point(const GradientDiscretisation& gd, int dof)
{
    Point sum(0.0, 0.0);
    int count = 0;
    for (const auto& piece : gd.matrix)
        for (int j = 1; j < 3; ++j)
            if (piece.dofs[j] == dof) {
                sum += (piece.vertices[0] + piece.vertices[1] + piece.vertices[2]) / 3.0;
                ++count;
            }
    if (count == 0) return gd.position[dof];
    return gd.position[dof] + 0.5 * (sum / count - gd.position[dof]);
}

Vector interpolate_initial(const GradientDiscretisation& gd, const std::function<double(const Point&)>& p_m,
                           const std::function<double(const Point&)>& p_f, const TraceInterpolant& trace)
{
    Vector v(gd.num_dofs);
    for (int i = 0; i < gd.num_dofs; ++i) {
        switch (gd.kind[i]) {
        case DofKind::Node:
        case DofKind::Cell: v[i] = p_m(gd.position[i]); break;
        case DofKind::Fracture: v[i] = p_f(gd.position[i]); break;
        case DofKind::Sector:
            v[i] = trace ? trace(gd.position[i], sector_inside_point(gd, i)) : p_m(gd.position[i]);
            break;
        }
    }
    return v;
}

}  // namespace fracflow
