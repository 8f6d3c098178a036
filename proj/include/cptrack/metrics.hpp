#pragma once

#include <map>
#include <vector>

#include "cptrack/tracker.hpp"

namespace cpt {

struct GtBox {
  long id = 0;
  ObjectClass cls = ObjectClass::person;
  BBox box;
};

struct GroundTruth {
  std::map<long, std::vector<GtBox>> frames;   // annotated frames only
  std::vector<long> annotated_frames() const;
};

struct EvalReport {
  long tp = 0, fp = 0, fn = 0, ids = 0;
  long gt_total = 0;
  long frames = 0;
  double rcll = 0, prcn = 0, moda = 0, mota = 0, motp = 0, far = 0;
  double mt = 0, ml = 0;
  double idf1 = 0, idr = 0, idp = 0;
  long idtp = 0, idfp = 0, idfn = 0;
};

struct FrameMatch {
  std::vector<std::pair<std::size_t, std::size_t>> matches;  // (gt, hyp)
  std::vector<std::size_t> fp;  // unmatched hyp indices
  std::vector<std::size_t> fn;  // unmatched gt indices
};

// Optimal IoU-maximizing bipartite matching at a single frame; pairs below
// the threshold are forbidden.
FrameMatch match_frame(const std::vector<BBox>& gt, const std::vector<BBox>& hyp,
                       double iou_thr);

// Detection metrics (Rcll/Prcn/TP/FP/FN/MODA) over annotated frames.
EvalReport evaluate_detection(const GroundTruth& gt,
                              const std::vector<Detection>& hyp, double iou_thr);

// CLEAR-MOT accumulation with temporal correspondence continuity.
EvalReport evaluate_tracking(const GroundTruth& gt, const TrackOutput& hyp,
                             double iou_thr);

// Identity measures under a global truth-to-hypothesis matching.
EvalReport evaluate_identity(const GroundTruth& gt, const TrackOutput& hyp,
                             double iou_thr);

// Ratios derived from published or externally supplied counts.
EvalReport report_from_counts(long tp, long fp, long fn, long ids, long gt_total);

}  // namespace cpt
