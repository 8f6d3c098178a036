#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cpt {

// Raised on malformed user input; the CLI maps it to exit code 1.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }

double distance(Point2 a, Point2 b);

// Axis-aligned box in center format (cx, cy, w, h).
struct BBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 0.0;
  double h = 0.0;

  double x0() const { return cx - 0.5 * w; }
  double y0() const { return cy - 0.5 * h; }
  double x1() const { return cx + 0.5 * w; }
  double y1() const { return cy + 0.5 * h; }
  double area() const { return w * h; }
  Point2 center() const { return {cx, cy}; }
};

struct Polygon {
  std::vector<Point2> vertices;
};

// rx, ry is the top-left corner of the region of interest.
struct Roi {
  double rx = 0.0;
  double ry = 0.0;
  double rw = 0.0;
  double rh = 0.0;

  Point2 center() const { return {rx + 0.5 * rw, ry + 0.5 * rh}; }
};

// 3x3 projective map between image planes, row-major.
struct Homography {
  std::array<std::array<double, 3>, 3> m{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};

  static Homography identity() { return Homography{}; }

  double det() const;
  Homography inverse() const;
  // Scales so m[2][2] == 1 when possible.
  Homography normalized() const;
  bool invertible(double eps = 1e-12) const;
};

Point2 rotate_point(Point2 p, double theta, Point2 center);

// Tightest axis-aligned box over the vertices. Throws ValidationError on a
// polygon with zero extent along either axis.
BBox polygon_bbox(const Polygon& poly);

double iou(const BBox& a, const BBox& b);

// Dehomogenized projection; throws ValidationError if the point maps to the
// line at infinity.
Point2 project_point(const Homography& h, Point2 p);

// Classical symmetric Hausdorff distance under the Euclidean metric.
// Throws ValidationError on empty input.
double hausdorff(const std::vector<Point2>& a, const std::vector<Point2>& b);

}  // namespace cpt
