#pragma once

#include <array>
#include <functional>
#include <vector>

#include "fracflow/mesh.hpp"

namespace fracflow {

using Polygon = std::vector<Point>;

struct QuadPoint {
    Point x;
    double weight;
};

/// Symmetric rule on a triangle; `level` > 0 applies the rule on the red-refined triangle
/// (4^level copies), which is how the quadrature-sufficiency checks gain accuracy.
std::vector<QuadPoint> triangle_quadrature(const Point& a, const Point& b, const Point& c, int level = 0);
/// Gauss-Legendre with 5 points on the segment [a, b], optionally composite over 2^level pieces.
std::vector<QuadPoint> segment_quadrature(const Point& a, const Point& b, int level = 0);

double integrate_triangle(const std::function<double(const Point&)>& f, const Point& a, const Point& b,
                          const Point& c, int level = 0);
double integrate_polygon(const std::function<double(const Point&)>& f, const Polygon& poly, int level = 0);

double polygon_area(const Polygon& poly);
/// Sutherland-Hodgman clip of a convex polygon to the half-plane n.x <= c.
Polygon clip_halfplane(const Polygon& poly, const Point& n, double c);
/// Intersection of two convex polygons (counterclockwise).
Polygon clip_convex(const Polygon& subject, const Polygon& clip);

}  // namespace fracflow
