#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cptrack/detection.hpp"

namespace cpt {

struct CameraSpec {
  std::string id;
  double width = 1920.0;
  double height = 1080.0;
  Roi roi{0, 0, 1920, 1080};
  // Visibility band of the camera in world coordinates (the primary
  // camera's image plane doubles as the world plane).
  double world_x0 = 0.0;
  double world_x1 = 1920.0;
  Homography to_primary;  // this camera's plane -> primary plane
};

struct NoiseModel {
  // Orientation-dependent detection probability: p_peak for upright
  // objects, dipping to p_trough at +-90 degrees relative orientation.
  double p_peak = 1.0;
  double p_trough = 1.0;
  double dip_sigma = 0.6;  // radians
  double center_jitter = 0.0;  // sigma, pixels
  double size_jitter = 0.0;
  double spurious_rate = 0.0;  // probability of a spurious detection per frame/angle
  double score_min = 0.9;
  double score_max = 0.99;
  double spurious_score_min = 0.5;
  double spurious_score_max = 0.9;
};

struct ScenarioConfig {
  std::uint64_t seed = 42;
  int passengers = 8;
  int bags = 6;
  int reentry_events = 0;
  long frames = 600;
  double speed = 6.0;  // pixels per frame
  int rotation_count = 20;
  std::vector<CameraSpec> cameras;  // element 0 is the primary; defaulted if empty
  std::map<int, int> ownership;     // bag index -> passenger index
  NoiseModel noise;
};

// Applies the default two-camera topology when cfg.cameras is empty.
ScenarioConfig with_default_cameras(ScenarioConfig cfg);

struct TruthBox {
  long object_id = 0;  // persons 1..P, bags P+1..P+B
  ObjectClass cls = ObjectClass::person;
  BBox box;            // camera coordinates
  double orientation = 0.0;  // radians, motion direction in world coords
};

struct ReentryEvent {
  long object_id = 0;
  long exit_frame = 0;
  long reenter_frame = 0;
  std::string camera;
};

struct ScenarioTruth {
  ScenarioConfig cfg;
  // camera id -> frame -> visible objects
  std::map<std::string, std::map<long, std::vector<TruthBox>>> frames;
  std::map<long, long> ownership;  // bag object id -> person object id
  std::vector<ReentryEvent> reentries;
};

ScenarioTruth generate(const ScenarioConfig& cfg);

// Mock per-angle detector: emits detections in rotated-ROI coordinates for
// one (frame, angle, camera) triple, deterministic in the scenario seed.
std::vector<Detection> mock_detect(const ScenarioTruth& truth, long frame,
                                   int angle_index, int n_angles,
                                   const std::string& camera);

// Orientation-dependent detection probability (exposed for tests).
double detection_probability(const NoiseModel& noise, double relative_orientation);

}  // namespace cpt
