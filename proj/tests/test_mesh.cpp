#include <sstream>

#include <gtest/gtest.h>

#include "fracflow/mesh.hpp"
#include "fracflow/mesh_io.hpp"
#include "support.hpp"

using namespace fracflow;
using fracflow::testing::reservoir_mesh;
using fracflow::testing::vertical_fracture;

namespace {

double total_area(const Mesh& m)
{
    double a = 0.0;
    for (int t = 0; t < m.num_triangles(); ++t) a += m.signed_area(t);
    return a;
}

bool has_violation(const std::vector<std::string>& v, const std::string& needle)
{
    for (const auto& s : v)
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST(StructuredMesh, CountsOnTwoByFourGrid)
{
    const Mesh m = reservoir_mesh(2, 4, false);
    EXPECT_EQ(m.num_triangles(), 16);
    EXPECT_EQ(m.num_nodes(), 15);
    EXPECT_TRUE(validate_mesh(m).empty());
    EXPECT_NEAR(total_area(m), 200.0, 1e-10 * 200.0);
}

TEST(StructuredMesh, FractureFollowsMeshLine)
{
    const Mesh m = reservoir_mesh(4, 8);
    ASSERT_EQ(m.fracture_edges().size(), 8u);
    for (const auto& e : m.fracture_edges()) {
        EXPECT_DOUBLE_EQ(m.nodes()[e.nodes[0]].x(), 5.0);
        EXPECT_DOUBLE_EQ(m.nodes()[e.nodes[1]].x(), 5.0);
        EXPECT_EQ(m.edge_triangles(e.nodes[0], e.nodes[1]).size(), 2u);
    }
    // every mesh edge on x = 5 is a fracture edge
    for (int t = 0; t < m.num_triangles(); ++t) {
        const auto& n = m.triangles()[t].nodes;
        for (int k = 0; k < 3; ++k) {
            const Point a = m.nodes()[n[k]], b = m.nodes()[n[(k + 1) % 3]];
            if (a.x() == 5.0 && b.x() == 5.0) EXPECT_TRUE(m.is_fracture_edge(n[k], n[(k + 1) % 3]));
        }
    }
}

TEST(StructuredMesh, WidthPassesThrough)
{
    StructuredMeshParams p;
    p.nx = 2;
    p.ny = 4;
    p.fractures.push_back(vertical_fracture(5.0, 20.0));
    p.fractures[0].width = 0.01;
    EXPECT_EQ(build_structured_mesh(p).fractures()[0].width, 0.01);
}

TEST(StructuredMesh, RejectsMisalignedFracture)
{
    StructuredMeshParams p;
    p.nx = 3;
    p.ny = 4;
    p.fractures.push_back(vertical_fracture(5.0, 20.0));
    EXPECT_THROW(build_structured_mesh(p), MeshError);
    p.nx = 1;
    p.fractures.clear();
    EXPECT_THROW(build_structured_mesh(p), MeshError);
}

TEST(ValidateMesh, FlippedTriangle)
{
    const Mesh m = reservoir_mesh(2, 4, false);
    auto tris = m.triangles();
    std::swap(tris[3].nodes[0], tris[3].nodes[1]);
    const Mesh bad(m.nodes(), tris, m.fracture_edges(), m.boundary_edges());
    EXPECT_TRUE(has_violation(validate_mesh(bad), "negative area at cell 3"));
}

TEST(ValidateMesh, NonManifoldFractureEdge)
{
    const Mesh m = reservoir_mesh(2, 4);
    auto nodes = m.nodes();
    auto tris = m.triangles();
    const auto& fe = m.fracture_edges()[0];
    nodes.emplace_back(7.0, 1.0);
    tris.push_back(Triangle{{fe.nodes[0], static_cast<int>(nodes.size()) - 1, fe.nodes[1]}, 0});
    const Mesh bad(nodes, tris, m.fracture_edges(), m.boundary_edges(), m.fractures());
    EXPECT_TRUE(has_violation(validate_mesh(bad), "non-manifold"));
}

TEST(Refine, FourTimesTrianglesAreaPreserved)
{
    const Mesh m = reservoir_mesh(2, 4);
    const Mesh r = refine_uniform(m);
    EXPECT_EQ(r.num_triangles(), 4 * m.num_triangles());
    EXPECT_EQ(r.fracture_edges().size(), 2 * m.fracture_edges().size());
    EXPECT_EQ(r.boundary_edges().size(), 2 * m.boundary_edges().size());
    EXPECT_TRUE(validate_mesh(r).empty());
    EXPECT_NEAR(total_area(r), total_area(m), 1e-12 * total_area(m));
    EXPECT_NEAR(r.max_edge_length(), 0.5 * m.max_edge_length(), 1e-12);
}

TEST(Sides, VerticalFractureNormals)
{
    const Mesh m = reservoir_mesh(4, 8);
    const auto g = side_geometry(m);
    ASSERT_EQ(g.sides.size(), 2u);
    const Point n0 = g.sides[0].edges[0].normal, n1 = g.sides[1].edges[0].normal;
    EXPECT_EQ(std::abs(n0.x()), 1.0);
    EXPECT_EQ(n0.y(), 0.0);
    EXPECT_EQ((n0 + n1).norm(), 0.0);
    for (const auto& side : g.sides) {
        EXPECT_EQ(side.edges.size(), m.fracture_edges().size());
        for (const auto& se : side.edges) {
            const auto& fe = m.fracture_edges()[se.fracture_edge];
            const Point mid = 0.5 * (m.nodes()[fe.nodes[0]] + m.nodes()[fe.nodes[1]]);
            EXPECT_LT((m.centroid(se.triangle) - mid).dot(se.normal), 0.0);
        }
    }
}

TEST(Sides, ThreeFracturesSixSides)
{
    StructuredMeshParams p;
    p.nx = 10;
    p.ny = 4;
    p.fractures = {vertical_fracture(2.0, 20.0, 0), vertical_fracture(5.0, 20.0, 1), vertical_fracture(8.0, 20.0, 2)};
    const Mesh m = build_structured_mesh(p);
    EXPECT_TRUE(validate_mesh(m).empty());
    EXPECT_EQ(side_geometry(m).sides.size(), 6u);
}

TEST(Sides, DanglingFractureEdge)
{
    const Mesh m = reservoir_mesh(2, 4, false);
    std::vector<FractureEdge> fe{FractureEdge{{0, 1}, 0, 0}};
    auto nodes = m.nodes();
    nodes.emplace_back(30.0, 30.0);
    nodes.emplace_back(31.0, 30.0);
    fe[0].nodes = {static_cast<int>(nodes.size()) - 2, static_cast<int>(nodes.size()) - 1};
    const Mesh bad(nodes, m.triangles(), fe, m.boundary_edges());
    EXPECT_THROW(side_geometry(bad), MeshError);
}

TEST(MeshIo, RoundTripIsExact)
{
    const Mesh m = refine_uniform(reservoir_mesh(2, 4));
    std::stringstream buf;
    write_mesh(buf, m);
    const Mesh r = read_mesh(buf);
    ASSERT_EQ(r.num_nodes(), m.num_nodes());
    ASSERT_EQ(r.num_triangles(), m.num_triangles());
    for (int i = 0; i < m.num_nodes(); ++i) EXPECT_EQ(r.nodes()[i], m.nodes()[i]);
    for (int t = 0; t < m.num_triangles(); ++t) EXPECT_EQ(r.triangles()[t].nodes, m.triangles()[t].nodes);
    EXPECT_EQ(r.fracture_edges().size(), m.fracture_edges().size());
    EXPECT_EQ(r.boundary_edges().size(), m.boundary_edges().size());
    ASSERT_EQ(r.fractures().size(), 1u);
    EXPECT_EQ(r.fractures()[0].width, m.fractures()[0].width);
}

TEST(MeshIo, RejectsBadHeaderAndIds)
{
    std::istringstream bad_header("fracflow-mesh v2\nNODES 0\n");
    EXPECT_THROW(read_mesh(bad_header), MeshError);
    std::istringstream bad_id("fracflow-mesh v1\nNODES 1\n3 0 0\nCELLS 0\nFRACTURE_EDGES 0\nBOUNDARY 0\n");
    EXPECT_THROW(read_mesh(bad_id), MeshError);
}
