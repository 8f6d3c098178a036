#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "cptrack/fusion.hpp"

using namespace cpt;

namespace {

Detection make_det(double cx, double cy, double w, double h, double score = 0.9,
                   int angle = 0) {
  Detection d;
  d.box = {cx, cy, w, h};
  d.score = score;
  d.angle_index = angle;
  return d;
}

// Forward transform into the rotated crop's local frame: the exact inverse
// of the remapping under test.
Point2 to_rotated(Point2 v, double theta, const Roi& roi) {
  const Point2 c_roi = roi.center();
  const Point2 shift = c_roi - Point2{0.5 * roi.rw, 0.5 * roi.rh};
  return rotate_point(v, theta, c_roi) - shift;
}

// Builds the per-angle detection of an axis-aligned image-plane box.
Detection rotated_view(const BBox& image_box, double theta, const Roi& roi,
                       double score, int angle) {
  Polygon fp;
  for (const Point2 corner : {Point2{image_box.x0(), image_box.y0()},
                              Point2{image_box.x1(), image_box.y0()},
                              Point2{image_box.x1(), image_box.y1()},
                              Point2{image_box.x0(), image_box.y1()}})
    fp.vertices.push_back(to_rotated(corner, theta, roi));
  Detection d;
  d.footprint = fp;
  d.box = polygon_bbox(fp);
  d.score = score;
  d.angle_index = angle;
  return d;
}

}  // namespace

TEST_CASE("remap at theta=0 is a pure ROI translation") {
  const Roi origin{0, 0, 200, 200};
  const auto same = remap_detections({make_det(60, 80, 10, 20)}, 0.0, origin);
  REQUIRE(same.size() == 1);
  CHECK(same[0].box.cx == doctest::Approx(60));
  CHECK(same[0].box.cy == doctest::Approx(80));
  CHECK(same[0].box.w == doctest::Approx(10));
  CHECK(same[0].box.h == doctest::Approx(20));

  const Roi shifted{100, 50, 200, 200};
  const auto moved = remap_detections({make_det(60, 80, 10, 20)}, 0.0, shifted);
  REQUIRE(moved.size() == 1);
  CHECK(moved[0].box.cx == doctest::Approx(160));
  CHECK(moved[0].box.cy == doctest::Approx(130));
  CHECK(moved[0].box.w == doctest::Approx(10));
  CHECK(moved[0].box.h == doctest::Approx(20));
}

TEST_CASE("remap at theta=pi and pi/2 hand values") {
  const Roi roi{0, 0, 200, 200};  // center (100, 100)
  const auto half = remap_detections({make_det(60, 80, 10, 20)},
                                     std::numbers::pi, roi);
  REQUIRE(half.size() == 1);
  CHECK(half[0].box.cx == doctest::Approx(140));
  CHECK(half[0].box.cy == doctest::Approx(120));
  CHECK(half[0].box.w == doctest::Approx(10));
  CHECK(half[0].box.h == doctest::Approx(20));

  const auto quarter = remap_detections({make_det(60, 80, 10, 20)},
                                        std::numbers::pi / 2, roi);
  REQUIRE(quarter.size() == 1);
  CHECK(quarter[0].box.cx == doctest::Approx(80));
  CHECK(quarter[0].box.cy == doctest::Approx(140));
  CHECK(quarter[0].box.w == doctest::Approx(20));  // width/height swap
  CHECK(quarter[0].box.h == doctest::Approx(10));
}

TEST_CASE("remap uses the footprint and recomputes the box") {
  const Roi roi{40, -20, 300, 240};
  const double theta = std::numbers::pi / 4;
  const BBox truth{150, 90, 30, 18};
  const Detection view = rotated_view(truth, theta, roi, 0.9, 1);
  const auto back = remap_detections({view}, theta, roi);
  REQUIRE(back.size() == 1);
  CHECK(back[0].box.cx == doctest::Approx(truth.cx));
  CHECK(back[0].box.cy == doctest::Approx(truth.cy));
  CHECK(back[0].box.w == doctest::Approx(truth.w));
  CHECK(back[0].box.h == doctest::Approx(truth.h));
  REQUIRE(back[0].footprint.has_value());
  CHECK(back[0].footprint->vertices[0].x == doctest::Approx(truth.x0()));
  CHECK(back[0].footprint->vertices[0].y == doctest::Approx(truth.y0()));
}

TEST_CASE("remap round-trip for random angles") {
  const Roi roi{-60, 10, 500, 400};
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> pos(50, 350), size(5, 60), ang(-7, 7);
  for (int t = 0; t < 100; ++t) {
    const BBox truth{pos(rng), pos(rng), size(rng), size(rng)};
    const double theta = ang(rng);
    const auto back =
        remap_detections({rotated_view(truth, theta, roi, 0.8, 0)}, theta, roi);
    REQUIRE(back.size() == 1);
    CHECK(std::abs(back[0].box.cx - truth.cx) < 1e-9);
    CHECK(std::abs(back[0].box.cy - truth.cy) < 1e-9);
    CHECK(std::abs(back[0].box.w - truth.w) < 1e-9);
    CHECK(std::abs(back[0].box.h - truth.h) < 1e-9);
  }
}

TEST_CASE("bandwidth hand values and floor") {
  CHECK_THROWS_AS(bandwidth({}, {1, 1, 1, 1}), ValidationError);

  const auto single = bandwidth({make_det(10, 10, 5, 5)}, {4, 4, 4, 4});
  for (double v : single) CHECK(v == doctest::Approx(4.0));

  // Two samples with cx in {0, 2}: sample variance 2; everything else
  // identical, so those components sit on the floor.
  const auto two =
      bandwidth({make_det(0, 7, 5, 5), make_det(2, 7, 5, 5)}, {1, 1, 1, 1});
  CHECK(two[0] == doctest::Approx(2.0));
  CHECK(two[1] == doctest::Approx(1.0));
  CHECK(two[2] == doctest::Approx(1.0));
  CHECK(two[3] == doctest::Approx(1.0));

  // Floor dominates small spread.
  const auto floored =
      bandwidth({make_det(0, 0, 5, 5), make_det(0.1, 0, 5, 5)}, {4, 4, 4, 4});
  CHECK(floored[0] == doctest::Approx(4.0));
}

TEST_CASE("mean_shift degenerate and grouped inputs") {
  CHECK_THROWS_AS(mean_shift({make_det(0, 0, 1, 1)}, {0, 1, 1, 1}),
                  ValidationError);
  CHECK(mean_shift({}, {1, 1, 1, 1}).empty());

  std::vector<Detection> same(5, make_det(50, 50, 10, 10));
  const auto one = mean_shift(same, {4, 4, 4, 4});
  REQUIRE(one.size() == 1);
  CHECK(one[0].members.size() == 5);

  std::vector<Detection> far;
  for (int i = 0; i < 4; ++i) far.push_back(make_det(10 + i, 10, 8, 8));
  for (int i = 0; i < 3; ++i) far.push_back(make_det(300 + i, 10, 8, 8));
  const auto two = mean_shift(far, {4, 4, 4, 4});
  REQUIRE(two.size() == 2);
  std::size_t total = two[0].members.size() + two[1].members.size();
  CHECK(total == far.size());
}

TEST_CASE("mean_shift agrees with a single-linkage oracle on separated groups") {
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> ngroups(1, 4), nper(1, 6);
  std::uniform_real_distribution<double> jitter(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    const int g = ngroups(rng);
    std::vector<Detection> dets;
    std::vector<int> truth_group;
    for (int k = 0; k < g; ++k) {
      const double cx = 100.0 + 250.0 * k, cy = 60.0 + 180.0 * (k % 2);
      const int m = nper(rng);
      for (int i = 0; i < m; ++i) {
        dets.push_back(
            make_det(cx + jitter(rng), cy + jitter(rng), 20, 20, 0.9, i));
        truth_group.push_back(k);
      }
    }
    const auto clusters = mean_shift(dets, {9, 9, 9, 9});
    // Partition property: every detection lands in exactly one cluster.
    std::size_t total = 0;
    for (const auto& q : clusters) total += q.members.size();
    CHECK(total == dets.size());
    // Each cluster must be pure and the count must match the group count.
    CHECK(clusters.size() == static_cast<std::size_t>(g));
    for (const auto& q : clusters) {
      REQUIRE(!q.members.empty());
      const double ref = q.members.front().box.cx;
      for (const auto& d : q.members) CHECK(std::abs(d.box.cx - ref) < 10.0);
    }
  }
}

TEST_CASE("cluster_score arithmetic") {
  Cluster q;
  q.members = {make_det(0, 0, 1, 1, 0.9), make_det(0, 0, 1, 1, 0.8),
               make_det(0, 0, 1, 1, 0.7)};
  CHECK(cluster_score(q, 3) == doctest::Approx(0.8));
  CHECK(cluster_score(q, 20) == doctest::Approx(2.4 / 20.0));
  CHECK_THROWS_AS(cluster_score(q, 0), ValidationError);

  Cluster empty;
  CHECK(cluster_score(empty, 4) == doctest::Approx(0.0));
}

TEST_CASE("fuse_frame validates the angle slot count") {
  AugmentedFrame af;
  af.roi = {0, 0, 100, 100};
  af.per_angle.resize(3);
  FusionConfig cfg;
  cfg.n = 4;
  CHECK_THROWS_AS(fuse_frame(af, ObjectClass::person, cfg), ValidationError);
}

TEST_CASE("fuse_frame with n=1 and lambda=0 reproduces raw boxes") {
  AugmentedFrame af;
  af.roi = {0, 0, 640, 480};
  af.per_angle.resize(1);
  af.per_angle[0] = {make_det(100, 80, 30, 40, 0.7), make_det(400, 300, 50, 20, 0.3)};
  FusionConfig cfg;
  cfg.n = 1;
  cfg.lambda = 0.0;
  auto out = fuse_frame(af, ObjectClass::person, cfg);
  REQUIRE(out.size() == 2);
  std::sort(out.begin(), out.end(),
            [](const Detection& a, const Detection& b) { return a.box.cx < b.box.cx; });
  CHECK(out[0].box.cx == doctest::Approx(100));
  CHECK(out[0].box.cy == doctest::Approx(80));
  CHECK(out[0].score == doctest::Approx(0.7));
  CHECK(out[1].box.w == doctest::Approx(50));
  CHECK(!out[0].angle_index.has_value());
}

TEST_CASE("fuse_frame recovers multiple objects and rejects sparse spurious hits") {
  const Roi roi{0, 0, 1200, 700};
  const int n = 8;
  const std::vector<BBox> objects{{150, 120, 60, 60}, {500, 400, 60, 60},
                                  {950, 200, 60, 60}};
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> jitter(-1.0, 1.0);

  AugmentedFrame af;
  af.roi = roi;
  af.per_angle.resize(n);
  for (int i = 0; i < n; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / n;
    for (const BBox& obj : objects) {
      BBox noisy = obj;
      noisy.cx += jitter(rng);
      noisy.cy += jitter(rng);
      af.per_angle[i].push_back(rotated_view(noisy, theta, roi, 0.9, i));
    }
  }
  // One isolated false positive at one angle only: score sum 0.6 of n=8.
  af.per_angle[3].push_back(rotated_view({700, 100, 40, 40},
                                         2.0 * std::numbers::pi * 3 / n, roi,
                                         0.6, 3));

  FusionConfig cfg;
  cfg.n = n;
  cfg.lambda = 0.5;
  const auto fused = fuse_frame(af, ObjectClass::person, cfg);
  REQUIRE(fused.size() == objects.size());
  for (const BBox& obj : objects) {
    bool found = false;
    for (const auto& d : fused)
      found = found || distance(d.box.center(), obj.center()) < 5.0;
    CHECK(found);
  }
  for (const auto& d : fused)
    CHECK(distance(d.box.center(), Point2{700, 100}) > 50.0);

  // Raising lambda never yields more detections.
  std::size_t prev = fused.size() + 1;
  for (double lam : {0.0, 0.3, 0.6, 0.95, 1.1}) {
    FusionConfig c2 = cfg;
    c2.lambda = lam;
    const std::size_t count = fuse_frame(af, ObjectClass::person, c2).size();
    CHECK(count <= prev);
    prev = count;
  }
}

TEST_CASE("fused center is stable across rotation counts") {
  const Roi roi{0, 0, 800, 600};
  const BBox truth{320, 240, 70, 70};
  for (int n : {4, 8, 20}) {
    AugmentedFrame af;
    af.roi = roi;
    af.per_angle.resize(n);
    for (int i = 0; i < n; ++i) {
      const double theta = 2.0 * std::numbers::pi * i / n;
      af.per_angle[i].push_back(rotated_view(truth, theta, roi, 1.0, i));
    }
    FusionConfig cfg;
    cfg.n = n;
    cfg.lambda = 0.5;
    const auto fused = fuse_frame(af, ObjectClass::person, cfg);
    REQUIRE(fused.size() == 1);
    CHECK(distance(fused[0].box.center(), truth.center()) < 0.5);
    CHECK(fused[0].box.w == doctest::Approx(truth.w).epsilon(0.01));
  }
}

TEST_CASE("fuse_frame keeps only the requested class") {
  AugmentedFrame af;
  af.roi = {0, 0, 640, 480};
  af.per_angle.resize(1);
  Detection person = make_det(100, 100, 30, 30, 0.9);
  Detection bag = make_det(300, 300, 20, 20, 0.9);
  bag.cls = ObjectClass::bag;
  af.per_angle[0] = {person, bag};
  FusionConfig cfg;
  cfg.n = 1;
  cfg.lambda = 0.0;
  const auto persons = fuse_frame(af, ObjectClass::person, cfg);
  REQUIRE(persons.size() == 1);
  CHECK(persons[0].box.cx == doctest::Approx(100));
  const auto bags = fuse_frame(af, ObjectClass::bag, cfg);
  REQUIRE(bags.size() == 1);
  CHECK(bags[0].box.cx == doctest::Approx(300));
}
