#include <doctest.h>

#include <cmath>
#include <vector>

#include "cptrack/tracker.hpp"

using namespace cpt;

namespace {

Detection det(long frame, double cx, double cy, double w = 40, double h = 40,
              ObjectClass cls = ObjectClass::person) {
  Detection d;
  d.frame = frame;
  d.camera = "cam";
  d.cls = cls;
  d.box = {cx, cy, w, h};
  d.score = 0.9;
  return d;
}

bool same_tracklets(const std::vector<Tracklet>& a,
                    const std::vector<Tracklet>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].label != b[i].label || a[i].entries.size() != b[i].entries.size())
      return false;
    for (std::size_t j = 0; j < a[i].entries.size(); ++j) {
      if (a[i].entries[j].first != b[i].entries[j].first) return false;
      const BBox &x = a[i].entries[j].second, &y = b[i].entries[j].second;
      if (x.cx != y.cx || x.cy != y.cy || x.w != y.w || x.h != y.h)
        return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("predict applies the constant-velocity model") {
  TrackerParams p;
  p.process_noise = 0.0;
  p.size_process_noise = 0.0;
  TrackBranch b;
  b.x << 10, 20, 2, -1, 5, 6;
  b.P = Eigen::Matrix<double, 6, 6>::Identity();

  const TrackBranch one = predict(b, p);
  CHECK(one.x(0) == doctest::Approx(12));
  CHECK(one.x(1) == doctest::Approx(19));
  CHECK(one.x(2) == doctest::Approx(2));
  CHECK(one.x(4) == doctest::Approx(5));
  CHECK(one.x(5) == doctest::Approx(6));

  TrackBranch cur = b;
  for (int i = 0; i < 5; ++i) cur = predict(cur, p);
  CHECK(cur.x(0) == doctest::Approx(10 + 5 * 2));
  CHECK(cur.x(1) == doctest::Approx(20 - 5 * 1));

  // With process noise the position variance must grow.
  TrackerParams q;
  q.process_noise = 1.0;
  const TrackBranch noisy = predict(b, q);
  CHECK(noisy.P(0, 0) > b.P(0, 0));
}

TEST_CASE("single steady object yields exactly one confirmed tracklet") {
  Tracker tracker(ObjectClass::person, "cam", TrackerParams{});
  std::vector<std::vector<Detection>> frames;
  for (long f = 0; f < 30; ++f)
    frames.push_back({det(f, 100 + 3.0 * f, 200)});
  const auto ts = tracker.run(frames);
  REQUIRE(ts.size() == 1);
  CHECK(ts[0].label == 1);
  CHECK(ts[0].cls == ObjectClass::person);
  CHECK(ts[0].camera == "cam");
  // Confirmation takes confirm_hits frames, so the first frame is withheld.
  CHECK(ts[0].entries.size() == 29);
  CHECK(ts[0].entries.front().first == 1);
  CHECK(ts[0].entries.back().first == 29);
  CHECK(ts[0].entries.back().second.cx ==
        doctest::Approx(100 + 3.0 * 29).epsilon(0.01));
  // Frames strictly increasing.
  for (std::size_t i = 1; i < ts[0].entries.size(); ++i)
    CHECK(ts[0].entries[i].first > ts[0].entries[i - 1].first);
}

TEST_CASE("crossing objects keep their identities through an occlusion") {
  Tracker tracker(ObjectClass::person, "cam", TrackerParams{});
  std::vector<std::vector<Detection>> frames;
  for (long f = 0; f < 30; ++f) {
    const double xa = 50 + 10.0 * f, xb = 350 - 10.0 * f;
    std::vector<Detection> dets;
    if (std::abs(xa - xb) <= 20) {
      dets.push_back(det(f, 0.5 * (xa + xb), 200));  // merged during overlap
    } else {
      dets.push_back(det(f, xa, 200));
      dets.push_back(det(f, xb, 200));
    }
    frames.push_back(std::move(dets));
  }
  const auto ts = tracker.run(frames);
  REQUIRE(ts.size() == 2);
  // Label 1 was born on the left-moving-right detection; it must end on the
  // right side, and label 2 the opposite: zero identity switches.
  const Tracklet& t1 = ts[0].label == 1 ? ts[0] : ts[1];
  const Tracklet& t2 = ts[0].label == 1 ? ts[1] : ts[0];
  CHECK(t1.entries.front().second.cx < 150);
  CHECK(t1.entries.back().second.cx > 250);
  CHECK(t2.entries.front().second.cx > 250);
  CHECK(t2.entries.back().second.cx < 150);
  CHECK(t1.entries.back().first == 29);
  CHECK(t2.entries.back().first == 29);
}

TEST_CASE("tracker output is deterministic") {
  auto build = [] {
    std::vector<std::vector<Detection>> frames;
    for (long f = 0; f < 25; ++f) {
      std::vector<Detection> dets{det(f, 100 + 4.0 * f, 120),
                                  det(f, 500 - 2.0 * f, 300)};
      if (f % 7 == 3) dets.pop_back();  // occasional dropout
      frames.push_back(std::move(dets));
    }
    return frames;
  };
  Tracker a(ObjectClass::person, "cam", TrackerParams{});
  Tracker b(ObjectClass::person, "cam", TrackerParams{});
  CHECK(same_tracklets(a.run(build()), b.run(build())));
}

TEST_CASE("hypothesis pruning to depth one matches the full tracker on easy scenes") {
  std::vector<std::vector<Detection>> frames;
  for (long f = 0; f < 20; ++f)
    frames.push_back({det(f, 100 + 5.0 * f, 100), det(f, 800 - 5.0 * f, 400)});
  Tracker mht(ObjectClass::person, "cam", TrackerParams{});
  TrackerParams greedy;
  greedy.nscan = 1;
  greedy.max_hyp = 1;
  Tracker gnn(ObjectClass::person, "cam", greedy);
  CHECK(same_tracklets(mht.run(frames), gnn.run(frames)));
}

TEST_CASE("short dropouts do not split a track") {
  Tracker tracker(ObjectClass::person, "cam", TrackerParams{});
  std::vector<std::vector<Detection>> frames;
  for (long f = 0; f < 30; ++f) {
    std::vector<Detection> dets;
    if (f < 10 || f > 12) dets.push_back(det(f, 100 + 3.0 * f, 200));
    frames.push_back(std::move(dets));
  }
  const auto ts = tracker.run(frames);
  REQUIRE(ts.size() == 1);
  bool has9 = false, has13 = false;
  for (const auto& [f, box] : ts[0].entries) {
    CHECK((f < 10 || f > 12));
    has9 = has9 || f == 9;
    has13 = has13 || f == 13;
  }
  CHECK(has9);
  CHECK(has13);
}

TEST_CASE("terminated labels are never reused") {
  Tracker tracker(ObjectClass::person, "cam", TrackerParams{});
  std::vector<std::vector<Detection>> frames;
  for (long f = 0; f < 40; ++f) {
    std::vector<Detection> dets;
    if (f <= 5 || f >= 25) dets.push_back(det(f, 100, 100));
    frames.push_back(std::move(dets));
  }
  const auto ts = tracker.run(frames);
  REQUIRE(ts.size() == 2);
  CHECK(ts[0].label != ts[1].label);
  CHECK(ts[0].entries.back().first <= 5);
  CHECK(ts[1].entries.front().first >= 25);
}

TEST_CASE("tracker rejects malformed input") {
  Tracker tracker(ObjectClass::person, "cam", TrackerParams{});
  tracker.step({det(5, 100, 100)}, 5);
  CHECK_THROWS_AS(tracker.step({det(5, 100, 100)}, 5), ValidationError);
  CHECK_THROWS_AS(tracker.step({det(4, 100, 100)}, 4), ValidationError);
  CHECK_THROWS_AS(
      tracker.step({det(6, 100, 100, 40, 40, ObjectClass::bag)}, 6),
      ValidationError);
  CHECK_THROWS_AS(tracker.step({det(9, 100, 100)}, 8), ValidationError);
}
