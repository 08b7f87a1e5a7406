#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "fracflow/elimination.hpp"
#include "fracflow/linear_solve.hpp"
#include "fracflow/vag.hpp"
#include "support.hpp"

using namespace fracflow;
using fracflow::testing::reservoir_mesh;

namespace {

int count(const GradientDiscretisation& gd, DofKind k)
{
    int n = 0;
    for (auto kind : gd.kind) n += kind == k;
    return n;
}

Vector affine_interpolant(const GradientDiscretisation& gd, double a, double b, double c)
{
    auto f = [=](const Point& x) { return a + b * x.x() + c * x.y(); };
    return interpolate_initial(gd, f, f);
}

}  // namespace

TEST(Vag, HandCountOnTwoByFourMesh)
{
    const Mesh mesh = reservoir_mesh(2, 4);
    const GradientDiscretisation gd = build_vag(mesh, 0);
    // 10 nodes off the fracture, 16 cells, 5 fracture nodes seen from 2 sides, 5 fracture DOFs
    EXPECT_EQ(count(gd, DofKind::Node), 10);
    EXPECT_EQ(count(gd, DofKind::Cell), 16);
    EXPECT_EQ(count(gd, DofKind::Sector), 10);
    EXPECT_EQ(count(gd, DofKind::Fracture), 5);
    EXPECT_EQ(gd.num_dofs, 41);
    EXPECT_EQ(gd.num_sides, 2);
    for (int i = 0; i < gd.num_dofs; ++i)
        if (gd.kind[i] == DofKind::Cell) EXPECT_GE(i, gd.num_dofs - 16);
}

TEST(Vag, AffineExactness)
{
    for (bool fractured : {false, true}) {
        const GradientDiscretisation gd = build_vag(refine_uniform(reservoir_mesh(4, 8, fractured)), 0);
        const Vector v = affine_interpolant(gd, 0.7, -1.3, 2.1);
        for (const auto& piece : gd.matrix) {
            Point g(0.0, 0.0);
            for (int j = 0; j < 3; ++j)
                if (piece.dofs[j] >= 0) g += piece.grad[j] * v[piece.dofs[j]];
            EXPECT_NEAR(g.x(), -1.3, 1e-13 * 10);
            EXPECT_NEAR(g.y(), 2.1, 1e-13 * 10);
        }
        for (const auto& piece : gd.fracture) {
            const double g = (v[piece.dofs[1]] - v[piece.dofs[0]]) / piece.length;
            EXPECT_NEAR(g, piece.tangent.dot(Point(-1.3, 2.1)), 1e-12);
        }
        // continuous data has no jump
        for (const auto& ip : gd.interface) EXPECT_EQ(v[ip.trace_dof] - v[ip.fracture_dof], 0.0);
    }
}

TEST(Vag, WeightsCoverEachElement)
{
    const Mesh mesh = reservoir_mesh(4, 8);
    const GradientDiscretisation gd = build_vag(mesh);
    std::vector<double> per_tri(mesh.num_triangles(), 0.0);
    for (const auto& part : gd.matrix_parts) {
        EXPECT_GT(part.measure, 0.0);
        per_tri[gd.matrix[part.piece].triangle] += part.measure;
    }
    for (int t = 0; t < mesh.num_triangles(); ++t) EXPECT_NEAR(per_tri[t], mesh.signed_area(t), 1e-12 * mesh.signed_area(t));
    for (std::size_t e = 0; e < gd.fracture.size(); ++e) {
        const double l = gd.fracture_parts[2 * e].length() + gd.fracture_parts[2 * e + 1].length();
        EXPECT_NEAR(l, gd.fracture[e].length, 1e-14);
        EXPECT_DOUBLE_EQ(gd.fracture_parts[2 * e].length(), gd.fracture_parts[2 * e + 1].length());
    }
}

TEST(Vag, DirichletMask)
{
    const GradientDiscretisation gd = build_vag(reservoir_mesh(4, 8), kTopBottom);
    int excluded = 0;
    for (int i = 0; i < gd.num_dofs; ++i) {
        const bool on_tb = gd.boundary_mask[i] & kTopBottom;
        EXPECT_EQ(static_cast<bool>(gd.dirichlet[i]), on_tb && gd.kind[i] != DofKind::Cell);
        excluded += gd.dirichlet[i];
    }
    EXPECT_EQ(gd.num_free(), gd.num_dofs - excluded);
    const auto idx = gd.free_index();
    for (int i = 0; i < gd.num_dofs; ++i) EXPECT_EQ(idx[i] < 0, static_cast<bool>(gd.dirichlet[i]));
    // side boundaries stay free
    for (int i = 0; i < gd.num_dofs; ++i)
        if (gd.boundary_mask[i] == tag_bit(BoundaryTag::Left)) EXPECT_FALSE(gd.dirichlet[i]);
}

TEST(Vag, InterpolateConstant)
{
    const GradientDiscretisation gd = build_vag(reservoir_mesh(4, 8));
    const Vector v = interpolate_initial(gd, [](const Point&) { return 4.5; }, [](const Point&) { return 4.5; });
    EXPECT_EQ((v.array() - 4.5).abs().maxCoeff(), 0.0);
}

TEST(Vag, InterpolationRoundTripConverges)
{
    auto phi = [](const Point& x) { return std::sin(0.3 * x.x()) * std::cos(0.2 * x.y()); };
    std::vector<double> err;
    Mesh mesh = reservoir_mesh(4, 8);
    for (int level = 0; level < 3; ++level) {
        if (level) mesh = refine_uniform(mesh);
        const GradientDiscretisation gd = build_vag(mesh);
        const Vector v = interpolate_initial(gd, phi, phi);
        double e2 = 0.0;
        for (const auto& part : gd.matrix_parts)
            e2 += integrate_polygon([&](const Point& x) { return std::pow(phi(x) - v[part.dof], 2); }, part.polygon, 1);
        err.push_back(std::sqrt(e2));
    }
    EXPECT_LT(err[1], 0.65 * err[0]);
    EXPECT_LT(err[2], 0.65 * err[1]);
}

TEST(Vag, OneSidedTraceInterpolation)
{
    const GradientDiscretisation gd = build_vag(reservoir_mesh(4, 8));
    auto pm = [](const Point& x) { return x.x() < 5.0 ? 1.0 : 2.0; };
    const Vector v = interpolate_initial(gd, pm, [](const Point&) { return 0.0; },
                                         [&](const Point&, const Point& inside) { return pm(inside); });
    for (int i = 0; i < gd.num_dofs; ++i)
        if (gd.kind[i] == DofKind::Sector) EXPECT_EQ(v[i], sector_inside_point(gd, i).x() < 5.0 ? 1.0 : 2.0);
}

namespace {

BlockMatrix random_jacobian(const BlockPattern& pat, std::mt19937& rng)
{
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BlockMatrix J(&pat);
    for (int i = 0; i < pat.num_rows; ++i)
        for (int s = pat.row_ptr[i]; s < pat.row_ptr[i + 1]; ++s) {
            Block b;
            b << u(rng), u(rng), u(rng), u(rng);
            J.blocks[s] = b;
        }
    for (int i = 0; i < pat.num_rows; ++i) {
        const int deg = pat.row_ptr[i + 1] - pat.row_ptr[i];
        J.at(i, i) += 2.5 * deg * Block::Identity();
    }
    return J;
}

}  // namespace

TEST(Elimination, MatchesFullSolve)
{
    const GradientDiscretisation gd = build_vag(reservoir_mesh(4, 8));
    const BlockPattern pat = discretisation_pattern(gd);
    std::vector<std::uint8_t> active(gd.num_dofs, 1), cells(gd.num_dofs, 0);
    for (int i = 0; i < gd.num_dofs; ++i) cells[i] = gd.kind[i] == DofKind::Cell;
    std::mt19937 rng(99);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 20; ++trial) {
        const BlockMatrix J = random_jacobian(pat, rng);
        const Vector b = Vector::NullaryExpr(2 * gd.num_dofs, [&] { return n(rng); });
        const ReducedSystem red = eliminate_cells(J, b, active, cells);
        EXPECT_EQ(static_cast<int>(red.kept.size()), gd.num_dofs - count(gd, DofKind::Cell));
        const Vector x = back_substitute(J, red, linear_solve(red.matrix, red.rhs));
        const Vector full = Eigen::MatrixXd(J.to_sparse()).partialPivLu().solve(b);
        EXPECT_LE((x - full).lpNorm<Eigen::Infinity>(), 1e-10);
    }
}

TEST(Elimination, IdentityCellBlocksLeaveNodeBlock)
{
    const GradientDiscretisation gd = build_vag(reservoir_mesh(2, 4));
    const BlockPattern pat = discretisation_pattern(gd);
    std::mt19937 rng(4);
    BlockMatrix J = random_jacobian(pat, rng);
    std::vector<std::uint8_t> active(gd.num_dofs, 1), cells(gd.num_dofs, 0);
    for (int i = 0; i < gd.num_dofs; ++i) {
        cells[i] = gd.kind[i] == DofKind::Cell;
        if (!cells[i]) continue;
        for (int s = pat.row_ptr[i]; s < pat.row_ptr[i + 1]; ++s) J.blocks[s].setZero();
        J.at(i, i) = Block::Identity();
    }
    const ReducedSystem red = eliminate_cells(J, Vector::Zero(2 * gd.num_dofs), active, cells);
    for (std::size_t k = 0; k < red.kept.size(); ++k)
        for (std::size_t l = 0; l < red.kept.size(); ++l) {
            const int i = red.kept[k], j = red.kept[l];
            const Block expect = pat.find(i, j) >= 0 ? J.at(i, j) : Block::Zero();
            for (int a = 0; a < 2; ++a)
                for (int c = 0; c < 2; ++c) EXPECT_EQ(red.matrix.coeff(2 * k + a, 2 * l + c), expect(a, c));
        }
}

TEST(Elimination, ZeroPivotReported)
{
    const GradientDiscretisation gd = build_vag(reservoir_mesh(2, 4));
    const BlockPattern pat = discretisation_pattern(gd);
    std::mt19937 rng(8);
    BlockMatrix J = random_jacobian(pat, rng);
    std::vector<std::uint8_t> active(gd.num_dofs, 1), cells(gd.num_dofs, 0);
    for (int i = 0; i < gd.num_dofs; ++i) cells[i] = gd.kind[i] == DofKind::Cell;
    const int c = gd.num_dofs - 1;
    J.at(c, c).row(0).setZero();
    try {
        eliminate_cells(J, Vector::Zero(2 * gd.num_dofs), active, cells);
        FAIL() << "expected a singular pivot";
    } catch (const SingularMatrixError& e) {
        EXPECT_EQ(e.row(), c);
    }
}

TEST(LinearSolve, IdentityAndDenseOracle)
{
    SparseMatrix I(7, 7);
    I.setIdentity();
    const Vector b = Vector::LinSpaced(7, 1.0, 7.0);
    EXPECT_EQ((linear_solve(I, b) - b).norm(), 0.0);

    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> col(0, 199);
    std::vector<Eigen::Triplet<double>> t;
    for (int i = 0; i < 200; ++i) {
        t.emplace_back(i, i, 10.0);
        for (int k = 0; k < 4; ++k) t.emplace_back(i, col(rng), u(rng));
    }
    SparseMatrix A(200, 200);
    A.setFromTriplets(t.begin(), t.end());
    const Vector rhs = Vector::NullaryExpr(200, [&] { return u(rng); });
    const Vector x = linear_solve(A, rhs), y = Eigen::MatrixXd(A).partialPivLu().solve(rhs);
    EXPECT_LE((x - y).lpNorm<Eigen::Infinity>(), 1e-10);
}

TEST(LinearSolve, NullRowIsSingular)
{
    SparseMatrix A(3, 3);
    A.insert(0, 0) = 1.0;
    A.insert(2, 2) = 1.0;
    A.insert(2, 1) = 1.0;
    EXPECT_THROW(linear_solve(A, Vector::Ones(3)), SingularMatrixError);
}
