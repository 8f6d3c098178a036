#pragma once

#include <utility>
#include <vector>

#include "cptrack/tracker.hpp"

namespace cpt {

struct StitchConfig {
  long t_th = 30;  // maximum temporal offset between fragments, frames
};

struct HandoffConfig {
  double d_max = 100.0;  // maximum Hausdorff distance, pixels
  Homography homography; // auxiliary plane -> primary plane
};

// Edges recorded between associated tracklets across the camera pair.
// Indices: primary tracklets first, then auxiliary tracklets.
struct ReachabilityGraph {
  std::size_t primary_count = 0;
  std::size_t aux_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (aux, primary)
};

// 1 - iou(first box of tau_m, last box of tau_n) when tau_m starts within
// (0, t_th] frames after tau_n ends; +inf otherwise.
double stitch_cost(const Tracklet& tau_m, const Tracklet& tau_n, long t_th);

// Merges temporally fragmented tracklets of one camera/class, iterating
// optimal assignment rounds until no candidate pair remains. Pairs whose
// boundary boxes do not overlap (cost >= 1) are never merged. Merged
// fragments carry the earliest fragment's label.
std::vector<Tracklet> stitch(std::vector<Tracklet> ts, const StitchConfig& cfg);

// Hausdorff distance between centroid sequences restricted to common
// frames; +inf when there is no overlap or the distance reaches d_max.
// tau_a_proj must already be in the primary image plane.
double handoff_cost(const Tracklet& tau_a_proj, const Tracklet& tau_p,
                    double d_max);

struct HandoffResult {
  std::vector<Tracklet> primary;  // relabeled
  ReachabilityGraph graph;
};

// Projects auxiliary tracklets through the homography and associates
// tracklet pairs with repeated assignment rounds; each match invalidates
// only temporally overlapping alternatives, so one auxiliary tracklet can
// bridge several disjoint primary fragments (re-entries). Every primary
// tracklet then takes the numerically smallest label of its connected
// component in the reachability graph.
HandoffResult associate_cameras(const std::vector<Tracklet>& primary,
                                const std::vector<Tracklet>& auxiliary,
                                const HandoffConfig& cfg);

}  // namespace cpt
