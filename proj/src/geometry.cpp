#include "cptrack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cpt {

double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double Homography::det() const {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

bool Homography::invertible(double eps) const { return std::abs(det()) > eps; }

Homography Homography::inverse() const {
  const double d = det();
  if (std::abs(d) <= 1e-12)
    throw ValidationError("homography is singular");
  Homography r;
  r.m[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
  r.m[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
  r.m[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
  r.m[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
  r.m[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
  r.m[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
  r.m[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
  r.m[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
  r.m[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
  return r.normalized();
}

Homography Homography::normalized() const {
  Homography r = *this;
  const double s = m[2][2];
  if (s != 0.0) {
    for (auto& row : r.m)
      for (auto& v : row) v /= s;
  }
  return r;
}

Point2 rotate_point(Point2 p, double theta, Point2 center) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double dx = p.x - center.x;
  const double dy = p.y - center.y;
  return {center.x + c * dx - s * dy, center.y + s * dx + c * dy};
}

BBox polygon_bbox(const Polygon& poly) {
  if (poly.vertices.empty())
    throw ValidationError("polygon_bbox: empty polygon");
  double x0 = std::numeric_limits<double>::infinity();
  double y0 = std::numeric_limits<double>::infinity();
  double x1 = -std::numeric_limits<double>::infinity();
  double y1 = -std::numeric_limits<double>::infinity();
  for (const auto& v : poly.vertices) {
    x0 = std::min(x0, v.x);
    y0 = std::min(y0, v.y);
    x1 = std::max(x1, v.x);
    y1 = std::max(y1, v.y);
  }
  if (!(x1 > x0) || !(y1 > y0))
    throw ValidationError("polygon_bbox: degenerate polygon");
  return {0.5 * (x0 + x1), 0.5 * (y0 + y1), x1 - x0, y1 - y0};
}

double iou(const BBox& a, const BBox& b) {
  const double ix = std::max(0.0, std::min(a.x1(), b.x1()) - std::max(a.x0(), b.x0()));
  const double iy = std::max(0.0, std::min(a.y1(), b.y1()) - std::max(a.y0(), b.y0()));
  const double inter = ix * iy;
  if (inter <= 0.0) return 0.0;
  const double uni = a.area() + b.area() - inter;
  return inter / uni;
}

Point2 project_point(const Homography& h, Point2 p) {
  const double X = h.m[0][0] * p.x + h.m[0][1] * p.y + h.m[0][2];
  const double Y = h.m[1][0] * p.x + h.m[1][1] * p.y + h.m[1][2];
  const double W = h.m[2][0] * p.x + h.m[2][1] * p.y + h.m[2][2];
  if (std::abs(W) < 1e-12)
    throw ValidationError("project_point: point maps to the line at infinity");
  return {X / W, Y / W};
}

double hausdorff(const std::vector<Point2>& a, const std::vector<Point2>& b) {
  if (a.empty() || b.empty())
    throw ValidationError("hausdorff: empty point set");
  auto directed = [](const std::vector<Point2>& u, const std::vector<Point2>& v) {
    double worst = 0.0;
    for (const auto& p : u) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : v) best = std::min(best, distance(p, q));
      worst = std::max(worst, best);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace cpt
