#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cptrack/geometry.hpp"

namespace cpt {

enum class ObjectClass { person, bag };

std::string to_string(ObjectClass c);
ObjectClass object_class_from_string(const std::string& s);

struct Detection {
  long frame = 0;
  std::string camera;
  ObjectClass cls = ObjectClass::person;
  BBox box;
  double score = 0.0;
  std::optional<Polygon> footprint;
  // Index of the rotation angle the detection was produced at; unset on
  // fused outputs.
  std::optional<int> angle_index;
};

// Per-angle detection sets for one frame, in rotated-ROI coordinates.
struct AugmentedFrame {
  long frame = 0;
  Roi roi;
  std::vector<std::vector<Detection>> per_angle;
};

struct Cluster {
  std::vector<Detection> members;
  std::size_t mode = 0;  // index into members
  double score_bar = 0.0;
};

struct FusionConfig {
  int n = 20;             // rotation count
  double lambda = 0.5;    // cluster-score threshold
  std::array<double, 4> bandwidth_floor{4.0, 4.0, 4.0, 4.0};  // pixels^2
  double eta_det = 0.5;   // forwarded to the detector source
  double eta_nms = 0.1;
  double convergence_eps = 1e-3;
  int max_iters = 100;
  double merge_radius = 1.0;  // in per-axis sqrt(h) units
};

}  // namespace cpt
