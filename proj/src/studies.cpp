#include "fracflow/studies.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include <Eigen/SparseLU>

#include "fracflow/vag.hpp"

namespace fracflow {

namespace {

using std::numbers::pi;

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::vector<GdmLevel> gdm_study(const Mesh& base, const GdmStudyOptions& options)
{
    const auto [lo, hi] = base.bounding_box();
    const double lx = hi.x() - lo.x(), ly = hi.y() - lo.y();
    const Point o = lo;
    auto X = [=](const Point& x) { return pi * (x.x() - o.x()) / lx; };
    auto Y = [=](const Point& x) { return pi * (x.y() - o.y()) / ly; };

    SmoothScalar u_m{[=](const Point& x) { return std::sin(X(x)) * std::sin(Y(x)); },
                     [=](const Point& x) {
                         return Point(pi / lx * std::cos(X(x)) * std::sin(Y(x)), pi / ly * std::sin(X(x)) * std::cos(Y(x)));
                     }};
    SmoothScalar u_f{[=](const Point& x) { return 0.5 * std::sin(Y(x)); },
                     [=](const Point& x) { return Point(0.0, 0.5 * pi / ly * std::cos(Y(x))); }};
    SmoothField q_m{[=](const Point& x) { return Point(std::cos(X(x)) * std::sin(Y(x)), std::sin(X(x)) * std::cos(Y(x))); },
                    [=](const Point& x) {
                        Eigen::Matrix2d J;
                        J << -pi / lx * std::sin(X(x)) * std::sin(Y(x)), pi / ly * std::cos(X(x)) * std::cos(Y(x)),
                            pi / lx * std::cos(X(x)) * std::cos(Y(x)), -pi / ly * std::sin(X(x)) * std::sin(Y(x));
                        return J;
                    }};
    SmoothField q_f{[=](const Point& x) { return Point(0.0, std::cos(Y(x))); },
                    [=](const Point& x) {
                        Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
                        J(1, 1) = -pi / ly * std::sin(Y(x));
                        return J;
                    }};
    auto phi = [](int, const Point&) { return 0.0; };

    std::vector<GdmLevel> out;
    Mesh mesh = base;
    for (int level = 0; level <= options.levels; ++level) {
        if (level > 0) mesh = refine_uniform(mesh);
        const GradientDiscretisation gd = build_vag(mesh, kAllBoundaries);
        const GDNormCache cache(gd);
        GdmLevel row;
        row.level = level;
        row.h = mesh.max_edge_length();
        row.num_dofs = gd.num_dofs;
        row.consistency = consistency_defect(gd, u_m, u_f, options.quad_level).value;
        const auto w = limit_conformity_defect(cache, q_m, q_f, phi, options.quad_level);
        row.limit_conformity = w.value;
        row.quadrature_insufficient = w.quadrature_insufficient;
        row.coercivity = coercivity_estimate(cache, options.eigen);
        row.translates = compactness_translate_estimate(cache, options.shifts, options.eigen);
        out.push_back(row);
    }
    return out;
}

std::string gdm_csv(const std::vector<GdmLevel>& levels)
{
    std::ostringstream out;
    out << "# fracflow-gdm v1\nlevel,h_m,dofs,S_D,W_D,W_D_quadrature_flag,C_D_lambda_max,C_D_low,C_D_high";
    const std::size_t ns = levels.empty() ? 0 : levels.front().translates.size();
    for (std::size_t k = 0; k < ns; ++k) out << ",T_D_" << k;
    out << '\n';
    for (const auto& l : levels) {
        out << l.level << ',' << num(l.h) << ',' << l.num_dofs << ',' << num(l.consistency) << ','
            << num(l.limit_conformity) << ',' << (l.quadrature_insufficient ? 1 : 0) << ','
            << num(l.coercivity.lambda_max) << ',' << num(l.coercivity.low) << ',' << num(l.coercivity.high);
        for (double t : l.translates) out << ',' << num(t);
        out << '\n';
    }
    return out.str();
}

// --- manufactured solution ----------------------------------------------------------------

std::vector<MmsLevel> mms_study(const StructuredMeshParams& base, int levels, double permeability)
{
    StructuredMeshParams params = base;
    params.fractures.clear();
    const double lx = params.lx, ly = params.ly;
    auto exact = [=](const Point& x) { return std::sin(pi * x.x() / lx) * std::sin(pi * x.y() / ly) + x.x() / lx; };
    auto exact_grad = [=](const Point& x) {
        return Point(pi / lx * std::cos(pi * x.x() / lx) * std::sin(pi * x.y() / ly) + 1.0 / lx,
                     pi / ly * std::sin(pi * x.x() / lx) * std::cos(pi * x.y() / ly));
    };
    auto source = [=](const Point& x) {
        return permeability * pi * pi * (1.0 / (lx * lx) + 1.0 / (ly * ly)) * std::sin(pi * x.x() / lx) *
               std::sin(pi * x.y() / ly);
    };

    std::vector<MmsLevel> out;
    Mesh mesh = build_structured_mesh(params);
    for (int level = 0; level < levels; ++level) {
        if (level > 0) mesh = refine_uniform(mesh);
        const GradientDiscretisation gd = build_vag(mesh, kAllBoundaries);
        const auto index = gd.free_index();
        const int nf = gd.num_free();
        Vector ud = Vector::Zero(gd.num_dofs);
        for (int i = 0; i < gd.num_dofs; ++i)
            if (gd.dirichlet[i]) ud[i] = exact(gd.position[i]);

        std::vector<Eigen::Triplet<double>> trip;
        Vector b = Vector::Zero(nf);
        for (const auto& piece : gd.matrix) {
            for (int j = 0; j < 3; ++j) {
                const int dj = piece.dofs[j];
                if (dj < 0 || index[dj] < 0) continue;
                for (int l = 0; l < 3; ++l) {
                    const int dl = piece.dofs[l];
                    if (dl < 0) continue;
                    const double a = permeability * piece.area * piece.grad[j].dot(piece.grad[l]);
                    if (index[dl] >= 0)
                        trip.emplace_back(index[dj], index[dl], a);
                    else
                        b[index[dj]] -= a * ud[dl];
                }
            }
        }
        for (const auto& part : gd.matrix_parts)
            if (index[part.dof] >= 0) b[index[part.dof]] += integrate_polygon(source, part.polygon, 1);
        SparseMatrix A(nf, nf);
        A.setFromTriplets(trip.begin(), trip.end());
        Eigen::SparseLU<SparseMatrix> lu;
        lu.compute(A);
        if (lu.info() != Eigen::Success) throw std::runtime_error("manufactured-solution system is singular");
        const Vector x = lu.solve(b);
        for (int i = 0; i < gd.num_dofs; ++i)
            if (index[i] >= 0) ud[i] = x[index[i]];

        MmsLevel row;
        row.level = level;
        row.h = mesh.max_edge_length();
        row.num_dofs = gd.num_dofs;
        double e2 = 0.0, g2 = 0.0;
        for (const auto& part : gd.matrix_parts) {
            const double v = ud[part.dof];
            e2 += integrate_polygon([&](const Point& p) { return std::pow(exact(p) - v, 2); }, part.polygon, 1);
        }
        for (const auto& piece : gd.matrix) {
            Point g(0.0, 0.0);
            for (int j = 0; j < 3; ++j)
                if (piece.dofs[j] >= 0) g += piece.grad[j] * ud[piece.dofs[j]];
            g2 += integrate_triangle([&](const Point& p) { return (exact_grad(p) - g).squaredNorm(); },
                                     piece.vertices[0], piece.vertices[1], piece.vertices[2], 1);
        }
        row.l2_error = std::sqrt(e2);
        row.grad_error = std::sqrt(g2);
        out.push_back(row);
    }
    return out;
}

std::string mms_csv(const std::vector<MmsLevel>& levels)
{
    std::ostringstream out;
    out << "# fracflow-mms v1\nlevel,h_m,dofs,l2_error,grad_error\n";
    for (const auto& l : levels)
        out << l.level << ',' << num(l.h) << ',' << l.num_dofs << ',' << num(l.l2_error) << ',' << num(l.grad_error)
            << '\n';
    return out.str();
}

double convergence_slope(const std::vector<double>& errors)
{
    const int n = static_cast<int>(errors.size());
    if (n < 2) return 0.0;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (int k = 0; k < n; ++k) {
        const double y = -std::log2(errors[k]);
        sx += k;
        sy += y;
        sxx += static_cast<double>(k) * k;
        sxy += k * y;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace fracflow
