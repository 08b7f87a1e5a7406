#include "fracflow/gdm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace fracflow {

int GradientDiscretisation::num_free() const
{
    return static_cast<int>(std::count(dirichlet.begin(), dirichlet.end(), std::uint8_t{0}));
}

std::vector<int> GradientDiscretisation::free_index() const
{
    std::vector<int> idx(num_dofs, -1);
    int k = 0;
    for (int i = 0; i < num_dofs; ++i)
        if (!dirichlet[i]) idx[i] = k++;
    return idx;
}

std::vector<int> GradientDiscretisation::free_dofs() const
{
    std::vector<int> out;
    for (int i = 0; i < num_dofs; ++i)
        if (!dirichlet[i]) out.push_back(i);
    return out;
}

std::vector<double> matrix_volumes(const GradientDiscretisation& gd)
{
    std::vector<double> vol(gd.num_dofs, 0.0);
    for (const auto& part : gd.matrix_parts) vol[part.dof] += part.measure;
    return vol;
}

std::vector<double> fracture_lengths(const GradientDiscretisation& gd)
{
    std::vector<double> len(gd.num_dofs, 0.0);
    for (const auto& part : gd.fracture_parts) len[part.dof] += part.length();
    return len;
}

std::vector<std::string> check_discretisation(const GradientDiscretisation& gd)
{
    std::vector<std::string> out;
    auto bad_dof = [&](int d) { return d < -1 || d >= gd.num_dofs; };
    if (static_cast<int>(gd.kind.size()) != gd.num_dofs || static_cast<int>(gd.dirichlet.size()) != gd.num_dofs)
        out.push_back("DOF tables have inconsistent sizes");
    double total = 0.0;
    for (std::size_t p = 0; p < gd.matrix.size(); ++p) {
        const auto& piece = gd.matrix[p];
        Point gsum(0.0, 0.0);
        for (int j = 0; j < 3; ++j) {
            if (bad_dof(piece.dofs[j])) out.push_back("matrix piece " + std::to_string(p) + " has a bad DOF");
            if (piece.dofs[j] >= 0) gsum += piece.grad[j];
        }
        if (gsum.norm() > 1e-9 * (piece.grad[0].norm() + piece.grad[1].norm() + piece.grad[2].norm()) &&
            piece.dofs[0] >= 0 && piece.dofs[1] >= 0 && piece.dofs[2] >= 0)
            out.push_back("matrix piece " + std::to_string(p) + " does not annihilate constants");
        double s = 0.0;
        for (int k = piece.part_begin; k < piece.part_end; ++k) {
            const auto& part = gd.matrix_parts[k];
            if (part.piece != static_cast<int>(p)) out.push_back("matrix part " + std::to_string(k) + " misfiled");
            if (part.measure < 0.0) out.push_back("matrix part " + std::to_string(k) + " has negative measure");
            s += part.measure;
        }
        if (std::abs(s - piece.area) > 1e-12 * piece.area)
            out.push_back("matrix piece " + std::to_string(p) + " parts do not cover it");
        total += piece.area;
    }
    if (gd.domain_area > 0.0 && std::abs(total - gd.domain_area) > 1e-12 * gd.domain_area)
        out.push_back("matrix pieces do not cover the domain");
    if (gd.fracture_parts.size() != 2 * gd.fracture.size()) out.push_back("fracture parts must be two per piece");
    for (const auto& ip : gd.interface)
        if (bad_dof(ip.trace_dof) || bad_dof(ip.fracture_dof)) out.push_back("interface piece has a bad DOF");
    return out;
}

// --- norm cache ---------------------------------------------------------------

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void add_gram_terms(const GradientDiscretisation& gd, const std::vector<int>& index, Triplets& t)
{
    for (const auto& piece : gd.matrix)
        for (int j = 0; j < 3; ++j) {
            if (piece.dofs[j] < 0 || index[piece.dofs[j]] < 0) continue;
            for (int k = 0; k < 3; ++k) {
                if (piece.dofs[k] < 0 || index[piece.dofs[k]] < 0) continue;
                t.emplace_back(index[piece.dofs[j]], index[piece.dofs[k]], piece.area * piece.grad[j].dot(piece.grad[k]));
            }
        }
    for (const auto& piece : gd.fracture) {
        const double c = 1.0 / piece.length;
        const std::array<double, 2> g{-1.0, 1.0};
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) {
                const int a = index[piece.dofs[j]], b = index[piece.dofs[k]];
                if (a >= 0 && b >= 0) t.emplace_back(a, b, c * g[j] * g[k]);
            }
    }
    for (const auto& ip : gd.interface) {
        const std::array<int, 2> d{index[ip.trace_dof], index[ip.fracture_dof]};
        const std::array<double, 2> g{1.0, -1.0};
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                if (d[j] >= 0 && d[k] >= 0) t.emplace_back(d[j], d[k], ip.length() * g[j] * g[k]);
    }
}

}  // namespace

GDNormCache::GDNormCache(const GradientDiscretisation& gd) : gd_(&gd)
{
    free_ = gd.free_dofs();
    index_ = gd.free_index();
    Triplets t;
    add_gram_terms(gd, index_, t);
    gram_.resize(size(), size());
    gram_.setFromTriplets(t.begin(), t.end());
    chol_ = std::make_unique<Eigen::SimplicialLLT<SparseMatrix>>(gram_);
    if (chol_->info() != Eigen::Success) throw std::runtime_error("the GD norm is not definite on X0");
}

Vector GDNormCache::restrict_to_free(const Vector& full) const
{
    if (full.size() != gd_->num_dofs) throw std::invalid_argument("DOF vector has the wrong size");
    Vector out(size());
    for (int k = 0; k < size(); ++k) out[k] = full[free_[k]];
    return out;
}

Vector GDNormCache::extend(const Vector& free) const
{
    if (free.size() != size()) throw std::invalid_argument("X0 vector has the wrong size");
    Vector out = Vector::Zero(gd_->num_dofs);
    for (int k = 0; k < size(); ++k) out[free_[k]] = free[k];
    return out;
}

Vector GDNormCache::solve(const Vector& r) const
{
    if (r.size() != size()) throw std::invalid_argument("functional has the wrong size");
    return chol_->solve(r);
}

double GDNormCache::dual_norm(const Vector& r) const { return std::sqrt(std::max(0.0, r.dot(solve(r)))); }

double gd_norm(const GDNormCache& cache, const Vector& v)
{
    Vector w;
    if (v.size() == cache.size()) {
        w = v;
    } else if (v.size() == cache.gd().num_dofs) {
        const auto& gd = cache.gd();
        for (int i = 0; i < gd.num_dofs; ++i)
            if (gd.dirichlet[i] && v[i] != 0.0) throw std::invalid_argument("vector does not vanish on Dirichlet DOFs");
        w = cache.restrict_to_free(v);
    } else {
        throw std::invalid_argument("vector size does not match the DOF space");
    }
    return std::sqrt(std::max(0.0, w.dot(cache.gram() * w)));
}

Vector reconstruction_mass(const GradientDiscretisation& gd)
{
    Vector m = Vector::Zero(gd.num_dofs);
    for (const auto& part : gd.matrix_parts) m[part.dof] += part.measure;
    for (const auto& part : gd.fracture_parts) m[part.dof] += part.length();
    for (const auto& ip : gd.interface) m[ip.trace_dof] += ip.length();
    return m;
}

// --- eigenvalue estimates -------------------------------------------------------

double generalized_largest_eigenvalue(const GDNormCache& cache, const SparseMatrix& G, const EigenOptions& opt)
{
    Eigen::SimplicialLLT<SparseMatrix> chol(cache.gram());
    if (chol.info() != Eigen::Success) throw std::runtime_error("the GD norm is not definite on X0");
    auto apply = [&](const Vector& y) -> Vector {
        Vector x = chol.permutationPinv() * Vector(chol.matrixU().solve(y));
        Vector z = G * x;
        return chol.matrixL().solve(Vector(chol.permutationP() * z));
    };
    return largest_eigenvalue(cache.size(), apply, opt);
}

CoercivityEstimate coercivity_estimate(const GDNormCache& cache, const EigenOptions& opt)
{
    const Vector mass = cache.restrict_to_free(reconstruction_mass(cache.gd()));
    const Vector root = mass.cwiseSqrt();
    auto apply = [&](const Vector& y) -> Vector {
        return root.cwiseProduct(cache.solve(root.cwiseProduct(y)));
    };
    CoercivityEstimate est;
    est.lambda_max = largest_eigenvalue(cache.size(), apply, opt);
    est.low = std::sqrt(est.lambda_max);
    est.high = std::sqrt((2.0 + cache.gd().num_sides) * est.lambda_max);
    return est;
}

// --- consistency ------------------------------------------------------------------

namespace {

Point integrate_vector(const std::function<Point(const Point&)>& f, const std::vector<QuadPoint>& rule)
{
    Point s(0.0, 0.0);
    for (const auto& q : rule) s += q.weight * f(q.x);
    return s;
}

double integrate_scalar(const std::function<double(const Point&)>& f, const std::vector<QuadPoint>& rule)
{
    double s = 0.0;
    for (const auto& q : rule) s += q.weight * f(q.x);
    return s;
}

std::vector<QuadPoint> polygon_rule(const Polygon& poly, int level)
{
    std::vector<QuadPoint> out;
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
        auto r = triangle_quadrature(poly[0], poly[i], poly[i + 1], level);
        out.insert(out.end(), r.begin(), r.end());
    }
    return out;
}

Point point_on(const FracturePiece& piece, double s) { return piece.ends[0] + s * piece.tangent; }

}  // namespace

ConsistencyResult consistency_defect(const GradientDiscretisation& gd, const SmoothScalar& u_m,
                                     const SmoothScalar& u_f, int quad_level)
{
    const auto index = gd.free_index();
    const int n = gd.num_free();
    Triplets t;
    add_gram_terms(gd, index, t);
    Vector b = Vector::Zero(n);
    auto f = [&](int dof) { return dof >= 0 ? index[dof] : -1; };

    for (const auto& piece : gd.matrix) {
        const Point gint = integrate_vector(u_m.gradient, triangle_quadrature(piece.vertices[0], piece.vertices[1],
                                                                              piece.vertices[2], quad_level));
        for (int j = 0; j < 3; ++j)
            if (f(piece.dofs[j]) >= 0) b[f(piece.dofs[j])] += piece.grad[j].dot(gint);
    }
    for (const auto& part : gd.matrix_parts) {
        const int i = f(part.dof);
        if (i < 0) continue;
        t.emplace_back(i, i, part.measure);
        b[i] += integrate_scalar(u_m.value, polygon_rule(part.polygon, quad_level));
    }
    for (const auto& piece : gd.fracture) {
        const auto rule = segment_quadrature(piece.ends[0], piece.ends[1], quad_level);
        const double dint = integrate_scalar([&](const Point& x) { return u_f.gradient(x).dot(piece.tangent); }, rule);
        if (f(piece.dofs[0]) >= 0) b[f(piece.dofs[0])] -= dint / piece.length;
        if (f(piece.dofs[1]) >= 0) b[f(piece.dofs[1])] += dint / piece.length;
    }
    for (const auto& part : gd.fracture_parts) {
        const int i = f(part.dof);
        if (i < 0) continue;
        const auto& piece = gd.fracture[part.piece];
        t.emplace_back(i, i, part.length());
        b[i] += integrate_scalar(u_f.value,
                                 segment_quadrature(point_on(piece, part.s0), point_on(piece, part.s1), quad_level));
    }
    for (const auto& ip : gd.interface) {
        const auto& piece = gd.fracture[ip.fracture_piece];
        const auto rule = segment_quadrature(point_on(piece, ip.s0), point_on(piece, ip.s1), quad_level);
        const double jump_int = integrate_scalar([&](const Point& x) { return u_m.value(x) - u_f.value(x); }, rule);
        const double trace_int = integrate_scalar(u_m.value, rule);
        const int it = f(ip.trace_dof), iff = f(ip.fracture_dof);
        if (it >= 0) {
            t.emplace_back(it, it, ip.length());
            b[it] += jump_int + trace_int;
        }
        if (iff >= 0) b[iff] -= jump_int;
    }
    SparseMatrix M(n, n);
    M.setFromTriplets(t.begin(), t.end());
    Eigen::SimplicialLDLT<SparseMatrix> solver(M);
    if (solver.info() != Eigen::Success) throw std::runtime_error("consistency normal equations are singular");
    const Vector vf = solver.solve(b);
    if (solver.info() != Eigen::Success) throw std::runtime_error("consistency normal equations are singular");

    ConsistencyResult res;
    res.v = Vector::Zero(gd.num_dofs);
    for (int i = 0; i < gd.num_dofs; ++i)
        if (index[i] >= 0) res.v[i] = vf[index[i]];
    const Vector& v = res.v;
    auto val = [&](int dof) { return dof >= 0 ? v[dof] : 0.0; };

    std::array<double, 6> sq{};
    for (const auto& piece : gd.matrix) {
        Point g(0.0, 0.0);
        for (int j = 0; j < 3; ++j) g += piece.grad[j] * val(piece.dofs[j]);
        sq[0] += integrate_scalar([&](const Point& x) { return (g - u_m.gradient(x)).squaredNorm(); },
                                  triangle_quadrature(piece.vertices[0], piece.vertices[1], piece.vertices[2],
                                                      quad_level));
    }
    for (const auto& part : gd.matrix_parts) {
        const double c = v[part.dof];
        sq[2] += integrate_scalar([&](const Point& x) { return std::pow(c - u_m.value(x), 2); },
                                  polygon_rule(part.polygon, quad_level));
    }
    for (const auto& piece : gd.fracture) {
        const double g = (v[piece.dofs[1]] - v[piece.dofs[0]]) / piece.length;
        sq[1] += integrate_scalar([&](const Point& x) { return std::pow(g - u_f.gradient(x).dot(piece.tangent), 2); },
                                  segment_quadrature(piece.ends[0], piece.ends[1], quad_level));
    }
    for (const auto& part : gd.fracture_parts) {
        const auto& piece = gd.fracture[part.piece];
        const double c = v[part.dof];
        sq[3] += integrate_scalar([&](const Point& x) { return std::pow(c - u_f.value(x), 2); },
                                  segment_quadrature(point_on(piece, part.s0), point_on(piece, part.s1), quad_level));
    }
    std::vector<std::array<double, 2>> side_sq(gd.num_sides, {0.0, 0.0});
    for (const auto& ip : gd.interface) {
        const auto& piece = gd.fracture[ip.fracture_piece];
        const auto rule = segment_quadrature(point_on(piece, ip.s0), point_on(piece, ip.s1), quad_level);
        const double tr = v[ip.trace_dof], jp = v[ip.trace_dof] - v[ip.fracture_dof];
        side_sq[ip.side][0] +=
            integrate_scalar([&](const Point& x) { return std::pow(jp - (u_m.value(x) - u_f.value(x)), 2); }, rule);
        side_sq[ip.side][1] += integrate_scalar([&](const Point& x) { return std::pow(tr - u_m.value(x), 2); }, rule);
    }
    for (int k = 0; k < 4; ++k) res.terms[k] = std::sqrt(sq[k]);
    for (const auto& s : side_sq) {
        res.terms[4] += std::sqrt(s[0]);
        res.terms[5] += std::sqrt(s[1]);
    }
    for (double x : res.terms) res.value += x;
    return res;
}

// --- limit conformity ---------------------------------------------------------------

namespace {

Vector conformity_functional(const GDNormCache& cache, const SmoothField& q_m, const SmoothField& q_f,
                             [[maybe_unused]] const std::function<double(int, const Point&)>& phi, int level)
{
    const auto& gd = cache.gd();
    const auto index = gd.free_index();
    Vector r = Vector::Zero(cache.size());
    auto add = [&](int dof, double v) {
        if (dof >= 0 && index[dof] >= 0) r[index[dof]] += v;
    };
    auto div_m = [&](const Point& x) { return q_m.jacobian(x).trace(); };
    for (const auto& piece : gd.matrix) {
        const Point qint = integrate_vector(q_m.value, triangle_quadrature(piece.vertices[0], piece.vertices[1],
                                                                           piece.vertices[2], level));
        for (int j = 0; j < 3; ++j) add(piece.dofs[j], piece.grad[j].dot(qint));
    }
    for (const auto& part : gd.matrix_parts) add(part.dof, integrate_scalar(div_m, polygon_rule(part.polygon, level)));
    for (const auto& piece : gd.fracture) {
        const Point t = piece.tangent;
        const double qint = integrate_scalar([&](const Point& x) { return q_f.value(x).dot(t); },
                                             segment_quadrature(piece.ends[0], piece.ends[1], level));
        add(piece.dofs[0], -qint / piece.length);
        add(piece.dofs[1], qint / piece.length);
    }
    for (const auto& part : gd.fracture_parts) {
        const auto& piece = gd.fracture[part.piece];
        const Point t = piece.tangent;
        add(part.dof, integrate_scalar([&](const Point& x) { return t.dot(q_f.jacobian(x) * t); },
                                       segment_quadrature(point_on(piece, part.s0), point_on(piece, part.s1), level)));
    }
    for (const auto& ip : gd.interface) {
        const auto& piece = gd.fracture[ip.fracture_piece];
        const auto rule = segment_quadrature(point_on(piece, ip.s0), point_on(piece, ip.s1), level);
        add(ip.trace_dof, -integrate_scalar([&](const Point& x) { return q_m.value(x).dot(ip.normal); }, rule));
        // the jump reconstruction is Pi_a v - Pi_f v, so the phi term cancels here
    }
    return r;
}

}  // namespace

LimitConformityResult limit_conformity_defect(const GDNormCache& cache, const SmoothField& q_m,
                                              const SmoothField& q_f,
                                              const std::function<double(int, const Point&)>& phi, int quad_level)
{
    LimitConformityResult res;
    res.functional = conformity_functional(cache, q_m, q_f, phi, quad_level);
    res.value = cache.dual_norm(res.functional);
    const double finer = cache.dual_norm(conformity_functional(cache, q_m, q_f, phi, quad_level + 1));
    const double scale = std::max(std::abs(finer), 1e-300);
    res.quadrature_insufficient = std::abs(finer - res.value) > 1e-6 * scale && std::abs(finer - res.value) > 1e-10;
    return res;
}

// --- compactness ----------------------------------------------------------------------

namespace {

struct Box {
    Point lo, hi;
};

Box bounds(const Polygon& p)
{
    Box b{p[0], p[0]};
    for (const auto& x : p) {
        b.lo = b.lo.cwiseMin(x);
        b.hi = b.hi.cwiseMax(x);
    }
    return b;
}

double interval_overlap(double a0, double a1, double b0, double b1)
{
    return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

struct Interval {
    int dof;
    double s0, s1;
};

void add_1d_overlaps(const std::vector<Interval>& iv, double shift, const std::vector<int>& index, Triplets& t)
{
    // pairs are few per interval; sort by start to prune
    std::vector<int> order(iv.size());
    for (std::size_t i = 0; i < iv.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return iv[a].s0 < iv[b].s0; });
    std::vector<double> starts(iv.size());
    for (std::size_t k = 0; k < order.size(); ++k) starts[k] = iv[order[k]].s0;
    double maxlen = 0.0;
    for (const auto& x : iv) maxlen = std::max(maxlen, x.s1 - x.s0);
    for (const auto& a : iv) {
        const int ia = index[a.dof];
        if (ia < 0) continue;
        t.emplace_back(ia, ia, 2.0 * (a.s1 - a.s0));
        // shifted interval of a: the function T v(s) = v(s + shift) is nonzero on [s0 - shift, s1 - shift]
        const double lo = a.s0 - shift, hi = a.s1 - shift;
        auto it = std::lower_bound(starts.begin(), starts.end(), lo - maxlen);
        for (auto k = static_cast<std::size_t>(it - starts.begin()); k < order.size() && starts[k] < hi; ++k) {
            const auto& b = iv[order[k]];
            const int ib = index[b.dof];
            if (ib < 0) continue;
            const double o = interval_overlap(lo, hi, b.s0, b.s1);
            if (o > 0.0) {
                t.emplace_back(ia, ib, -o);
                t.emplace_back(ib, ia, -o);
            }
        }
    }
}

}  // namespace

SparseMatrix translate_gram(const GradientDiscretisation& gd, const Point& xi)
{
    const auto index = gd.free_index();
    Triplets t;

    // matrix: 2 M - O - O^T with O_{ab} = |(P_a - xi) cap P_b|
    const auto& parts = gd.matrix_parts;
    std::vector<Box> boxes(parts.size());
    Point lo(1e300, 1e300), hi(-1e300, -1e300);
    double cell = 0.0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        boxes[k] = bounds(parts[k].polygon);
        lo = lo.cwiseMin(boxes[k].lo);
        hi = hi.cwiseMax(boxes[k].hi);
        cell = std::max(cell, (boxes[k].hi - boxes[k].lo).maxCoeff());
    }
    if (!parts.empty()) {
        const int nx = std::max(1, static_cast<int>((hi.x() - lo.x()) / cell) + 1);
        const int ny = std::max(1, static_cast<int>((hi.y() - lo.y()) / cell) + 1);
        std::vector<std::vector<int>> grid(static_cast<std::size_t>(nx) * ny);
        auto cx = [&](double x) { return std::clamp(static_cast<int>((x - lo.x()) / cell), 0, nx - 1); };
        auto cy = [&](double y) { return std::clamp(static_cast<int>((y - lo.y()) / cell), 0, ny - 1); };
        for (std::size_t k = 0; k < parts.size(); ++k)
            grid[static_cast<std::size_t>(cy(boxes[k].lo.y())) * nx + cx(boxes[k].lo.x())].push_back(static_cast<int>(k));
        for (std::size_t a = 0; a < parts.size(); ++a) {
            const int ia = index[parts[a].dof];
            if (ia < 0) continue;
            t.emplace_back(ia, ia, 2.0 * parts[a].measure);
            Polygon shifted = parts[a].polygon;
            for (auto& x : shifted) x -= xi;
            const Box sb{boxes[a].lo - xi, boxes[a].hi - xi};
            if (sb.hi.x() < lo.x() || sb.hi.y() < lo.y() || sb.lo.x() > hi.x() || sb.lo.y() > hi.y()) continue;
            const int x0 = std::max(0, cx(sb.lo.x()) - 1), x1 = cx(sb.hi.x());
            const int y0 = std::max(0, cy(sb.lo.y()) - 1), y1 = cy(sb.hi.y());
            for (int gy = y0; gy <= y1; ++gy)
                for (int gx = x0; gx <= x1; ++gx)
                    for (int b : grid[static_cast<std::size_t>(gy) * nx + gx]) {
                        const int ib = index[parts[b].dof];
                        if (ib < 0) continue;
                        const Box& bb = boxes[b];
                        if (bb.lo.x() >= sb.hi.x() || bb.hi.x() <= sb.lo.x() || bb.lo.y() >= sb.hi.y() ||
                            bb.hi.y() <= sb.lo.y())
                            continue;
                        const double o = polygon_area(clip_convex(shifted, parts[b].polygon));
                        if (o > 0.0) {
                            t.emplace_back(ia, ib, -o);
                            t.emplace_back(ib, ia, -o);
                        }
                    }
        }
    }

    // fractures and sides: 1D translates by the projection of xi on the fracture line
    for (int f = 0; f < gd.num_fractures; ++f) {
        Point tangent(0.0, 0.0), origin(0.0, 0.0);
        bool found = false;
        for (const auto& piece : gd.fracture) {
            if (piece.fracture != f) continue;
            if (!found) {
                tangent = piece.tangent;
                origin = piece.ends[0];
                found = true;
            } else if (std::abs(tangent.x() * piece.tangent.y() - tangent.y() * piece.tangent.x()) > 1e-9) {
                throw std::invalid_argument("translate estimates need straight fractures");
            }
        }
        if (!found) continue;
        const double shift = xi.dot(tangent);
        auto coord = [&](const FracturePiece& piece, double s) { return (point_on(piece, s) - origin).dot(tangent); };
        auto interval = [&](int dof, const FracturePiece& piece, double s0, double s1) {
            double a = coord(piece, s0), b = coord(piece, s1);
            if (a > b) std::swap(a, b);
            return Interval{dof, a, b};
        };
        std::vector<Interval> frac;
        for (const auto& part : gd.fracture_parts)
            if (gd.fracture[part.piece].fracture == f)
                frac.push_back(interval(part.dof, gd.fracture[part.piece], part.s0, part.s1));
        add_1d_overlaps(frac, shift, index, t);
        for (int side = 2 * f; side <= 2 * f + 1; ++side) {
            std::vector<Interval> sv;
            for (const auto& ip : gd.interface)
                if (ip.side == side) sv.push_back(interval(ip.trace_dof, gd.fracture[ip.fracture_piece], ip.s0, ip.s1));
            add_1d_overlaps(sv, shift, index, t);
        }
    }
    const int n = gd.num_free();
    SparseMatrix G(n, n);
    G.setFromTriplets(t.begin(), t.end());
    return G;
}

std::vector<double> compactness_translate_estimate(const GDNormCache& cache, const std::vector<Point>& shifts,
                                                   const EigenOptions& opt)
{
    std::vector<double> out;
    for (const auto& xi : shifts) {
        if (xi.norm() == 0.0) {
            out.push_back(0.0);
            continue;
        }
        const SparseMatrix G = translate_gram(cache.gd(), xi);
        out.push_back(std::sqrt(std::max(0.0, generalized_largest_eigenvalue(cache, G, opt))));
    }
    return out;
}

Vector discrete_time_derivative(const Vector& w_prev, const Vector& w_next, double dt)
{
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    if (w_prev.size() != w_next.size()) throw std::invalid_argument("time levels differ in size");
    return (w_next - w_prev) / dt;
}

}  // namespace fracflow
