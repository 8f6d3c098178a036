#pragma once

#include <array>
#include <vector>

#include "cptrack/detection.hpp"

namespace cpt {

// Maps detections from rotated-ROI coordinates back to original-image
// coordinates: vertices are shifted from the rotated crop's local frame and
// rotated by -theta about the ROI center. Boxes are recomputed from the
// remapped footprints.
std::vector<Detection> remap_detections(const std::vector<Detection>& dets,
                                        double theta, const Roi& roi);

// Per-axis sample variance of (cx, cy, w, h), floored per component.
std::array<double, 4> bandwidth(const std::vector<Detection>& dets,
                                const std::array<double, 4>& floor);

// Mean-shift with a diagonal Gaussian kernel over (cx, cy, w, h).
// The returned clusters partition the input; score_bar is left at 0.
std::vector<Cluster> mean_shift(const std::vector<Detection>& dets,
                                const std::array<double, 4>& h,
                                double convergence_eps = 1e-3,
                                int max_iters = 100,
                                double merge_radius = 1.0);

double cluster_score(const Cluster& q, int n);

// Full per-frame fusion: remap every angle slot, pool, cluster, filter by
// the cluster-score threshold, and emit each surviving cluster's mode.
std::vector<Detection> fuse_frame(const AugmentedFrame& af, ObjectClass cls,
                                  const FusionConfig& cfg);

}  // namespace cpt
