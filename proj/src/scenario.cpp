#include "cptrack/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cpt {

namespace {

constexpr double kPersonSize = 70.0;
constexpr double kBagSize = 44.0;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
}

std::uint64_t hash_str(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

double u01(std::uint64_t h) {
  return double(h >> 11) * 0x1.0p-53;
}

// Deterministic standard normal from two hashed uniforms.
double gauss(std::uint64_t h) {
  const double u1 = std::max(u01(splitmix64(h)), 1e-12);
  const double u2 = u01(splitmix64(h ^ 0xabcdef1234567890ull));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double wrap_pi(double a) {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

struct Timeline {
  long start = 0;
  std::vector<Point2> pos;
  std::vector<double> orient;

  long end() const { return start + static_cast<long>(pos.size()) - 1; }
  bool alive(long f) const { return f >= start && f <= end(); }
  Point2 at(long f) const { return pos[static_cast<std::size_t>(f - start)]; }
  double orient_at(long f) const {
    return orient[static_cast<std::size_t>(f - start)];
  }
};

void append_move(Timeline& t, Point2 target, double speed) {
  const Point2 from = t.pos.back();
  const double dist = distance(from, target);
  const long steps = std::max<long>(1, static_cast<long>(std::ceil(dist / speed)));
  const double heading =
      dist > 1e-9 ? std::atan2(target.y - from.y, target.x - from.x)
                  : t.orient.back();
  for (long s = 1; s <= steps; ++s) {
    const double a = double(s) / double(steps);
    t.pos.push_back({from.x + a * (target.x - from.x),
                     from.y + a * (target.y - from.y)});
    t.orient.push_back(heading);
  }
}

void append_dwell(Timeline& t, long frames) {
  for (long s = 0; s < frames; ++s) {
    t.pos.push_back(t.pos.back());
    t.orient.push_back(t.orient.back());
  }
}

}  // namespace

ScenarioConfig with_default_cameras(ScenarioConfig cfg) {
  if (!cfg.cameras.empty()) return cfg;
  CameraSpec primary;
  primary.id = "cam9";
  primary.world_x0 = 0.0;
  primary.world_x1 = 1920.0;

  CameraSpec aux;
  aux.id = "cam2";
  aux.world_x0 = -660.0;
  aux.world_x1 = 960.0;
  aux.to_primary.m = {{{0.98, 0.012, -680.0}, {-0.01, 0.99, 6.0}, {0.0, 0.0, 1.0}}};

  cfg.cameras = {primary, aux};
  return cfg;
}

double detection_probability(const NoiseModel& noise, double relative_orientation) {
  if (noise.p_peak == noise.p_trough) return noise.p_peak;
  const double phi = wrap_pi(relative_orientation);
  const double s2 = 2.0 * noise.dip_sigma * noise.dip_sigma;
  double dip = 0.0;
  for (double center : {std::numbers::pi / 2, -std::numbers::pi / 2,
                        3 * std::numbers::pi / 2, -3 * std::numbers::pi / 2}) {
    const double d = phi - center;
    dip += std::exp(-d * d / s2);
  }
  const double p = noise.p_peak - (noise.p_peak - noise.p_trough) * dip;
  return std::clamp(p, noise.p_trough, noise.p_peak);
}

ScenarioTruth generate(const ScenarioConfig& raw_cfg) {
  const ScenarioConfig cfg = with_default_cameras(raw_cfg);
  if (cfg.passengers < 0 || cfg.bags < 0 || cfg.reentry_events < 0)
    throw ValidationError("scenario: counts must be non-negative");
  if (!(cfg.speed > 0))
    throw ValidationError("scenario: speed must be > 0");
  if (cfg.cameras.empty() || cfg.frames < 1)
    throw ValidationError("scenario: need at least one camera and one frame");

  ScenarioTruth truth;
  truth.cfg = cfg;
  if (cfg.passengers == 0) return truth;

  const int P = cfg.passengers;
  const double lane_step = P > 1 ? 720.0 / double(P - 1) : 0.0;

  // Distribute detours (one re-entry event each) round-robin.
  std::vector<int> detours(P, 0);
  for (int e = 0; e < cfg.reentry_events; ++e) detours[e % P] += 1;

  std::vector<Timeline> persons(P);
  std::vector<long> divest_done(P), retrieve_arrive(P);
  for (int i = 0; i < P; ++i) {
    const double y = P > 1 ? 180.0 + lane_step * i : 540.0;
    Timeline& t = persons[i];
    t.start = 15L * i;
    t.pos.push_back({40.0, y});
    t.orient.push_back(0.0);
    append_move(t, {500.0, y}, cfg.speed);  // divestiture
    append_dwell(t, 20);
    divest_done[i] = t.end();
    append_move(t, {900.0, y}, cfg.speed);  // metal detector
    for (int d = 0; d < detours[i]; ++d) {
      append_move(t, {-80.0, y}, cfg.speed);
      append_dwell(t, 8);
      append_move(t, {900.0, y}, cfg.speed);
    }
    append_move(t, {1300.0, y}, cfg.speed);  // retrieval
    retrieve_arrive[i] = t.end();
    append_dwell(t, 40);
    append_move(t, {1880.0, y}, cfg.speed);  // exit
    if (t.end() >= cfg.frames)
      throw ValidationError(
          "scenario: configured frame count is too short for passenger paths "
          "(needs at least " + std::to_string(t.end() + 1) + " frames)");
  }

  const Point2 bag_offset{26.0, 18.0};
  std::vector<Timeline> bags(cfg.bags);
  for (int j = 0; j < cfg.bags; ++j) {
    int owner = j % P;
    if (const auto it = cfg.ownership.find(j); it != cfg.ownership.end()) {
      if (it->second < 0 || it->second >= P)
        throw ValidationError("scenario: bag owner out of range");
      owner = it->second;
    }
    const Timeline& o = persons[owner];
    Timeline& b = bags[j];
    b.start = o.start;
    // Carried by the owner until divestiture ends.
    for (long f = o.start; f <= divest_done[owner]; ++f) {
      b.pos.push_back(o.at(f) + bag_offset);
      b.orient.push_back(o.orient_at(f));
    }
    // Conveyor leg.
    const double y = o.pos.front().y;
    append_move(b, {650.0, y - 50.0}, cfg.speed);
    append_move(b, {1290.0, y - 40.0}, cfg.speed * 0.8);
    if (b.end() < retrieve_arrive[owner])
      append_dwell(b, retrieve_arrive[owner] - b.end());
    // Rejoin the owner and leave together.
    append_move(b, o.at(std::min(b.end() + 12, o.end())) + bag_offset, cfg.speed);
    for (long f = b.end() + 1; f <= o.end(); ++f) {
      b.pos.push_back(o.at(f) + bag_offset);
      b.orient.push_back(o.orient_at(f));
    }
    truth.ownership[long(P + 1 + j)] = long(owner + 1);
  }

  // Rasterize visibility per camera.
  std::vector<Homography> from_primary;
  for (const auto& cam : cfg.cameras)
    from_primary.push_back(cam.to_primary.inverse());

  auto emit = [&](long object_id, ObjectClass cls, double size,
                  const Timeline& t) {
    for (long f = t.start; f <= std::min(t.end(), cfg.frames - 1); ++f) {
      const Point2 p = t.at(f);
      for (std::size_t c = 0; c < cfg.cameras.size(); ++c) {
        const CameraSpec& cam = cfg.cameras[c];
        if (p.x < cam.world_x0 || p.x > cam.world_x1) continue;
        if (p.y < 0.0 || p.y > cam.height) continue;
        const Point2 q = project_point(from_primary[c], p);
        truth.frames[cam.id][f].push_back(
            {object_id, cls, {q.x, q.y, size, size}, t.orient_at(f)});
      }
    }
  };
  for (int i = 0; i < P; ++i)
    emit(i + 1, ObjectClass::person, kPersonSize, persons[i]);
  for (int j = 0; j < cfg.bags; ++j)
    emit(P + 1 + j, ObjectClass::bag, kBagSize, bags[j]);

  // Re-entry events on the primary camera: exit across x=0 and return.
  const CameraSpec& primary = cfg.cameras.front();
  for (int i = 0; i < P; ++i) {
    const Timeline& t = persons[i];
    long exit_frame = -1;
    for (long f = t.start + 1; f <= std::min(t.end(), cfg.frames - 1); ++f) {
      const bool was_in = t.at(f - 1).x >= primary.world_x0;
      const bool is_in = t.at(f).x >= primary.world_x0;
      if (was_in && !is_in) exit_frame = f;
      if (!was_in && is_in && exit_frame >= 0) {
        truth.reentries.push_back({long(i + 1), exit_frame, f, primary.id});
        exit_frame = -1;
      }
    }
  }
  return truth;
}

std::vector<Detection> mock_detect(const ScenarioTruth& truth, long frame,
                                   int angle_index, int n_angles,
                                   const std::string& camera) {
  if (n_angles < 1 || angle_index < 0 || angle_index >= n_angles)
    throw ValidationError("mock_detect: bad angle index");
  const auto cam_it =
      std::find_if(truth.cfg.cameras.begin(), truth.cfg.cameras.end(),
                   [&](const CameraSpec& c) { return c.id == camera; });
  if (cam_it == truth.cfg.cameras.end())
    throw ValidationError("mock_detect: unknown camera " + camera);
  const CameraSpec& cam = *cam_it;
  const NoiseModel& noise = truth.cfg.noise;
  const double theta = 2.0 * std::numbers::pi * angle_index / n_angles;
  const Point2 c_roi = cam.roi.center();
  const Point2 shift = c_roi - Point2{0.5 * cam.roi.rw, 0.5 * cam.roi.rh};

  auto to_rotated = [&](Point2 v) {
    return rotate_point(v, theta, c_roi) - shift;
  };

  const std::uint64_t cam_hash = hash_str(camera);
  const std::uint64_t base =
      hash_combine(hash_combine(truth.cfg.seed, cam_hash), std::uint64_t(frame));

  std::vector<Detection> out;
  const auto frames_it = truth.frames.find(camera);
  if (frames_it != truth.frames.end()) {
    const auto boxes_it = frames_it->second.find(frame);
    if (boxes_it != frames_it->second.end()) {
      for (const TruthBox& tb : boxes_it->second) {
        const std::uint64_t obj =
            hash_combine(base, std::uint64_t(tb.object_id));
        const double p =
            detection_probability(noise, tb.orientation - theta);
        // Systematic sampling across the angle grid: every angle keeps its
        // marginal detection probability while the per-frame detection
        // count stays within one of its expectation.
        double c0 = 0.0;
        for (int j = 0; j < angle_index; ++j)
          c0 += detection_probability(
              noise, tb.orientation - 2.0 * std::numbers::pi * j / n_angles);
        const double u = u01(hash_combine(obj, 1));
        if (std::floor(c0 + p - u + 1e-12) <= std::floor(c0 - u + 1e-12))
          continue;

        const std::uint64_t jitter_seed =
            hash_combine(obj, std::uint64_t(1000 + angle_index));
        const double jx = noise.center_jitter * gauss(hash_combine(jitter_seed, 2));
        const double jy = noise.center_jitter * gauss(hash_combine(jitter_seed, 3));
        const double jw = noise.size_jitter * gauss(hash_combine(jitter_seed, 4));
        const double jh = noise.size_jitter * gauss(hash_combine(jitter_seed, 5));
        const BBox box{tb.box.cx + jx, tb.box.cy + jy,
                       std::max(4.0, tb.box.w + jw), std::max(4.0, tb.box.h + jh)};

        Polygon fp;
        fp.vertices = {to_rotated({box.x0(), box.y0()}),
                       to_rotated({box.x1(), box.y0()}),
                       to_rotated({box.x1(), box.y1()}),
                       to_rotated({box.x0(), box.y1()})};
        Detection d;
        d.frame = frame;
        d.camera = camera;
        d.cls = tb.cls;
        d.footprint = fp;
        d.box = polygon_bbox(fp);
        d.angle_index = angle_index;
        d.score = noise.score_min +
                  (noise.score_max - noise.score_min) *
                      u01(hash_combine(jitter_seed, 6));
        out.push_back(std::move(d));
      }
    }
  }

  // Spurious detections, at most one per (frame, angle).
  const std::uint64_t spur =
      hash_combine(base, 0x5b5e5a00dull + std::uint64_t(angle_index));
  if (u01(hash_combine(spur, 1)) < noise.spurious_rate) {
    Detection d;
    d.frame = frame;
    d.camera = camera;
    d.cls = (hash_combine(spur, 2) & 1) ? ObjectClass::bag : ObjectClass::person;
    const double x = cam.roi.rw * (0.1 + 0.8 * u01(hash_combine(spur, 3)));
    const double y = cam.roi.rh * (0.1 + 0.8 * u01(hash_combine(spur, 4)));
    const double w = 30.0 + 40.0 * u01(hash_combine(spur, 5));
    d.box = {x, y, w, w};
    d.angle_index = angle_index;
    d.score = noise.spurious_score_min +
              (noise.spurious_score_max - noise.spurious_score_min) *
                  u01(hash_combine(spur, 6));
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace cpt
