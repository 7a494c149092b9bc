#pragma once

#include <array>
#include <vector>

namespace polarpl {

using Point2 = std::array<double, 2>;

// Convex hull (Andrew monotone chain), counter-clockwise, no duplicates.
// Degenerate inputs (all collinear) return the extreme segment endpoints.
std::vector<Point2> convex_hull_2d(std::vector<Point2> pts);

// Distance from p to the segment [a, b].
double dist_point_segment(const Point2& p, const Point2& a, const Point2& b);

// Distance from p to a convex polygon boundary (or its single point/segment).
double dist_point_polygon(const Point2& p, const std::vector<Point2>& poly);

// Signed area test helper.
double cross(const Point2& o, const Point2& a, const Point2& b);

bool point_in_convex_polygon(const Point2& p, const std::vector<Point2>& poly, double tol);

}  // namespace polarpl
