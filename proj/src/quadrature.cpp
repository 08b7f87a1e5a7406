#include "fracflow/quadrature.hpp"

#include <cmath>

namespace fracflow {

namespace {

// Degree-5 seven point rule (barycentric coordinates, weights sum to 1).
struct TriRule {
    std::array<std::array<double, 3>, 7> bary;
    std::array<double, 7> w;
};

const TriRule& dunavant5()
{
    static const TriRule rule = [] {
        const double a1 = 0.059715871789770, b1 = 0.470142064105115;
        const double a2 = 0.797426985353087, b2 = 0.101286507323456;
        const double w0 = 0.225, w1 = 0.132394152788506, w2 = 0.125939180544827;
        TriRule r{};
        r.bary = {{{1.0 / 3, 1.0 / 3, 1.0 / 3},
                   {a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
                   {a2, b2, b2}, {b2, a2, b2}, {b2, b2, a2}}};
        r.w = {w0, w1, w1, w1, w2, w2, w2};
        return r;
    }();
    return rule;
}

void add_triangle(std::vector<QuadPoint>& out, const Point& a, const Point& b, const Point& c, int level)
{
    if (level > 0) {
        const Point ab = 0.5 * (a + b), bc = 0.5 * (b + c), ca = 0.5 * (c + a);
        add_triangle(out, a, ab, ca, level - 1);
        add_triangle(out, ab, b, bc, level - 1);
        add_triangle(out, ca, bc, c, level - 1);
        add_triangle(out, ab, bc, ca, level - 1);
        return;
    }
    const double area = 0.5 * std::abs((b - a).x() * (c - a).y() - (b - a).y() * (c - a).x());
    const auto& r = dunavant5();
    for (int q = 0; q < 7; ++q)
        out.push_back({r.bary[q][0] * a + r.bary[q][1] * b + r.bary[q][2] * c, r.w[q] * area});
}

}  // namespace

std::vector<QuadPoint> triangle_quadrature(const Point& a, const Point& b, const Point& c, int level)
{
    std::vector<QuadPoint> out;
    out.reserve(7u << (2 * level));
    add_triangle(out, a, b, c, level);
    return out;
}

std::vector<QuadPoint> segment_quadrature(const Point& a, const Point& b, int level)
{
    static const std::array<double, 5> x{0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                         0.9061798459386640};
    static const std::array<double, 5> w{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                         0.2369268850561891, 0.2369268850561891};
    const int pieces = 1 << level;
    const double len = (b - a).norm() / pieces;
    std::vector<QuadPoint> out;
    out.reserve(5 * pieces);
    for (int k = 0; k < pieces; ++k) {
        const Point p0 = a + (b - a) * (double(k) / pieces);
        const Point p1 = a + (b - a) * (double(k + 1) / pieces);
        for (int q = 0; q < 5; ++q) out.push_back({0.5 * (p0 + p1) + 0.5 * x[q] * (p1 - p0), 0.5 * w[q] * len});
    }
    return out;
}

double integrate_triangle(const std::function<double(const Point&)>& f, const Point& a, const Point& b,
                          const Point& c, int level)
{
    double s = 0.0;
    for (const auto& q : triangle_quadrature(a, b, c, level)) s += q.weight * f(q.x);
    return s;
}

double integrate_polygon(const std::function<double(const Point&)>& f, const Polygon& poly, int level)
{
    double s = 0.0;
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) s += integrate_triangle(f, poly[0], poly[i], poly[i + 1], level);
    return s;
}

double polygon_area(const Polygon& poly)
{
    double s = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % poly.size()];
        s += p.x() * q.y() - p.y() * q.x();
    }
    return 0.5 * s;
}

Polygon clip_halfplane(const Polygon& poly, const Point& n, double c)
{
    Polygon out;
    if (poly.empty()) return out;
    out.reserve(poly.size() + 1);
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % poly.size()];
        const double dp = n.dot(p) - c, dq = n.dot(q) - c;
        if (dp <= 0.0) out.push_back(p);
        if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) out.push_back(p + (dp / (dp - dq)) * (q - p));
    }
    if (out.size() < 3) out.clear();
    return out;
}

Polygon clip_convex(const Polygon& subject, const Polygon& clip)
{
    Polygon out = subject;
    for (std::size_t i = 0; i < clip.size() && !out.empty(); ++i) {
        const Point& p = clip[i];
        const Point& q = clip[(i + 1) % clip.size()];
        const Point e = q - p;
        const Point n(e.y(), -e.x());  // outward for counterclockwise clip polygons
        out = clip_halfplane(out, n, n.dot(p));
    }
    return out;
}

}  // namespace fracflow
