#pragma once

#include <Eigen/Dense>
#include <deque>
#include <vector>

#include "cptrack/detection.hpp"

namespace cpt {

struct TrackerParams {
  double gate_chi2 = 9.21;      // chi-square, 2 dof, 99%
  double process_noise = 1.0;   // position/velocity variance per frame
  double meas_noise = 4.0;      // measurement variance (pixels^2)
  double size_process_noise = 0.5;
  int confirm_hits = 2;         // M consecutive associations to confirm
  int delete_misses = 10;       // L consecutive misses to terminate
  int nscan = 3;                // pruning depth N
  int max_hyp = 100;            // hypothesis cap per track tree K
  double score_decay = 1.0;
};

enum class TrackStatus { tentative, confirmed, terminated };

// One hypothesis branch of a track tree: a Kalman state plus the recent
// association decisions (detection index per frame, -1 for a miss).
struct TrackBranch {
  Eigen::Matrix<double, 6, 1> x;  // cx, cy, vx, vy, w, h
  Eigen::Matrix<double, 6, 6> P;
  double score = 0.0;
  std::deque<int> recent;
};

struct TrackState {
  long label = 0;
  TrackStatus status = TrackStatus::tentative;
  int hits = 0;
  int misses = 0;
  std::vector<TrackBranch> branches;  // branches[0] is the best hypothesis
  std::vector<std::pair<long, BBox>> history;  // (frame, filtered box)
};

struct TrackOutputEntry {
  long frame = 0;
  long label = 0;
  BBox box;
  ObjectClass cls = ObjectClass::person;
};

using TrackOutput = std::vector<TrackOutputEntry>;

struct Tracklet {
  long label = 0;
  std::string camera;
  ObjectClass cls = ObjectClass::person;
  std::vector<std::pair<long, BBox>> entries;  // strictly increasing frames
};

// Constant-velocity time update on (cx, cy); random walk on (w, h).
TrackBranch predict(const TrackBranch& b, const TrackerParams& params);

// Per-class, per-camera multiple hypothesis tracker. Feed frames in
// increasing order; confirmed tracks emit one output entry per associated
// frame under a label that is never reused.
class Tracker {
 public:
  Tracker(ObjectClass cls, std::string camera, TrackerParams params);

  // Detections must all carry this tracker's class and a common frame.
  TrackOutput step(const std::vector<Detection>& dets, long frame);

  // Folds step() over a frame-ordered stream and returns all confirmed
  // tracklets (live and terminated).
  std::vector<Tracklet> run(const std::vector<std::vector<Detection>>& frames,
                            long first_frame = 0);

  std::vector<Tracklet> tracklets() const;
  const std::vector<TrackState>& tracks() const { return tracks_; }
  const TrackOutput& output() const { return output_; }

 private:
  ObjectClass cls_;
  std::string camera_;
  TrackerParams params_;
  std::vector<TrackState> tracks_;
  TrackOutput output_;
  long next_label_ = 1;
  long last_frame_ = -1;
  bool started_ = false;
};

}  // namespace cpt
