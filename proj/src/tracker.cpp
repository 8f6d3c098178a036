#include "cptrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cptrack/assignment.hpp"

namespace cpt {

namespace {

using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat46 = Eigen::Matrix<double, 4, 6>;

constexpr double kMissLogPenalty = -2.302585;  // log(1 - Pd), Pd = 0.9
// Per-hit log-likelihood-ratio offset: log Pd - (d/2) log(2 pi) - log lambda_fa
// with Pd = 0.9, d = 4, false-alarm density lambda_fa = 1e-6. Keeps genuine
// associations scoring above the miss alternative.
constexpr double kHitLogOffset = 10.0345;
constexpr double kInitVelocityVar = 100.0;

Mat6 transition() {
  Mat6 f = Mat6::Identity();
  f(0, 2) = 1.0;  // cx += vx
  f(1, 3) = 1.0;  // cy += vy
  return f;
}

Mat46 measurement() {
  Mat46 h = Mat46::Zero();
  h(0, 0) = 1.0;
  h(1, 1) = 1.0;
  h(2, 4) = 1.0;
  h(3, 5) = 1.0;
  return h;
}

Vec4 measure(const Detection& d) {
  Vec4 z;
  z << d.box.cx, d.box.cy, d.box.w, d.box.h;
  return z;
}

BBox box_of(const Vec6& x) {
  return {x(0), x(1), std::max(x(4), 1e-6), std::max(x(5), 1e-6)};
}

struct GateInfo {
  bool gated = false;
  double neg_loglik = 0.0;
};

GateInfo evaluate_pair(const TrackBranch& b, const Vec4& z,
                       const TrackerParams& p) {
  static const Mat46 H = measurement();
  Mat4 R = Mat4::Zero();
  R(0, 0) = R(1, 1) = R(2, 2) = R(3, 3) = p.meas_noise;
  const Mat4 S = H * b.P * H.transpose() + R;
  const Vec4 y = z - H * b.x;

  // Gate on position only (2 dof).
  Eigen::Matrix2d s2 = S.topLeftCorner<2, 2>();
  const Eigen::Vector2d y2 = y.head<2>();
  const double d2 = y2.dot(s2.inverse() * y2);
  GateInfo g;
  if (d2 > p.gate_chi2) return g;

  const double maha = y.dot(S.inverse() * y);
  g.gated = true;
  g.neg_loglik = 0.5 * (maha + std::log(S.determinant()));
  return g;
}

TrackBranch kalman_update(const TrackBranch& b, const Vec4& z,
                          const TrackerParams& p) {
  static const Mat46 H = measurement();
  Mat4 R = Mat4::Zero();
  R(0, 0) = R(1, 1) = R(2, 2) = R(3, 3) = p.meas_noise;
  const Mat4 S = H * b.P * H.transpose() + R;
  const Eigen::Matrix<double, 6, 4> K = b.P * H.transpose() * S.inverse();
  TrackBranch r = b;
  r.x = b.x + K * (z - H * b.x);
  r.P = (Mat6::Identity() - K * H) * b.P;
  return r;
}

}  // namespace

TrackBranch predict(const TrackBranch& b, const TrackerParams& params) {
  static const Mat6 F = transition();
  Mat6 Q = Mat6::Zero();
  Q(0, 0) = Q(1, 1) = Q(2, 2) = Q(3, 3) = params.process_noise;
  Q(4, 4) = Q(5, 5) = params.size_process_noise;
  TrackBranch r = b;
  r.x = F * b.x;
  r.P = F * b.P * F.transpose() + Q;
  return r;
}

Tracker::Tracker(ObjectClass cls, std::string camera, TrackerParams params)
    : cls_(cls), camera_(std::move(camera)), params_(std::move(params)) {}

TrackOutput Tracker::step(const std::vector<Detection>& dets, long frame) {
  if (started_ && frame <= last_frame_)
    throw ValidationError("tracker: frames must be strictly increasing");
  for (const auto& d : dets) {
    if (d.cls != cls_)
      throw ValidationError("tracker: mixed object classes in one step");
    if (d.frame != frame)
      throw ValidationError("tracker: mixed frames in one step");
  }
  started_ = true;
  last_frame_ = frame;

  std::vector<std::size_t> live;
  for (std::size_t i = 0; i < tracks_.size(); ++i)
    if (tracks_[i].status != TrackStatus::terminated) live.push_back(i);

  std::vector<Vec4> z(dets.size());
  for (std::size_t j = 0; j < dets.size(); ++j) z[j] = measure(dets[j]);

  // Time update for every branch of every live track.
  for (std::size_t ti : live)
    for (auto& b : tracks_[ti].branches) b = predict(b, params_);

  // Gating per (branch, detection); track-level cost is the best branch's.
  struct BranchGates {
    std::vector<GateInfo> per_det;
  };
  std::vector<std::vector<BranchGates>> gates(live.size());
  CostMatrix cm(live.size(), dets.size(), kInfCost);
  double min_cost = 0.0;
  for (std::size_t li = 0; li < live.size(); ++li) {
    TrackState& t = tracks_[live[li]];
    gates[li].resize(t.branches.size());
    for (std::size_t bi = 0; bi < t.branches.size(); ++bi) {
      gates[li][bi].per_det.resize(dets.size());
      for (std::size_t j = 0; j < dets.size(); ++j) {
        const GateInfo g = evaluate_pair(t.branches[bi], z[j], params_);
        gates[li][bi].per_det[j] = g;
        if (g.gated && g.neg_loglik < cm.at(li, j)) {
          cm.at(li, j) = g.neg_loglik;
          min_cost = std::min(min_cost, g.neg_loglik);
        }
      }
    }
  }
  // Assignment requires non-negative entries; a uniform shift does not
  // change the optimum within a fixed cardinality.
  if (min_cost < 0.0)
    for (auto& v : cm.cost)
      if (std::isfinite(v)) v -= min_cost;

  const Assignment assn = solve(cm);
  std::vector<int> det_of_track(live.size(), -1);
  std::vector<char> det_taken(dets.size(), 0);
  for (const auto& [li, j] : assn.pairs) {
    det_of_track[li] = static_cast<int>(j);
    det_taken[j] = 1;
  }

  TrackOutput emitted;
  for (std::size_t li = 0; li < live.size(); ++li) {
    TrackState& t = tracks_[live[li]];
    const int assigned = det_of_track[li];

    // Expand: each branch spawns a miss child plus one child per gated
    // detection.
    std::vector<TrackBranch> expanded;
    for (std::size_t bi = 0; bi < t.branches.size(); ++bi) {
      const TrackBranch& b = t.branches[bi];
      TrackBranch miss = b;
      miss.score = params_.score_decay * b.score + kMissLogPenalty;
      miss.recent.push_back(-1);
      expanded.push_back(std::move(miss));
      for (std::size_t j = 0; j < dets.size(); ++j) {
        const GateInfo& g = gates[li][bi].per_det[j];
        if (!g.gated) continue;
        TrackBranch child = kalman_update(b, z[j], params_);
        child.score =
            params_.score_decay * b.score + kHitLogOffset - g.neg_loglik;
        child.recent.push_back(static_cast<int>(j));
        expanded.push_back(std::move(child));
      }
    }

    // Anchor: best branch consistent with the global hypothesis.
    std::size_t anchor = 0;
    double anchor_score = -std::numeric_limits<double>::infinity();
    for (std::size_t bi = 0; bi < expanded.size(); ++bi) {
      if (expanded[bi].recent.back() != assigned) continue;
      if (expanded[bi].score > anchor_score) {
        anchor_score = expanded[bi].score;
        anchor = bi;
      }
    }

    // N-scan: decisions older than nscan frames are committed to the
    // anchor's history.
    if (static_cast<int>(expanded[anchor].recent.size()) >= params_.nscan) {
      const int committed = expanded[anchor].recent.front();
      std::vector<TrackBranch> kept;
      for (std::size_t bi = 0; bi < expanded.size(); ++bi) {
        if (expanded[bi].recent.front() != committed) continue;
        if (bi == anchor) anchor = kept.size();
        kept.push_back(std::move(expanded[bi]));
      }
      for (auto& b : kept) b.recent.pop_front();
      expanded = std::move(kept);
    }

    // Keep the anchor first, then the rest by score, capped at max_hyp.
    TrackBranch anchor_branch = std::move(expanded[anchor]);
    expanded.erase(expanded.begin() + static_cast<std::ptrdiff_t>(anchor));
    std::stable_sort(expanded.begin(), expanded.end(),
                     [](const TrackBranch& a, const TrackBranch& b) {
                       return a.score > b.score;
                     });
    t.branches.clear();
    t.branches.push_back(std::move(anchor_branch));
    for (auto& b : expanded) {
      if (static_cast<int>(t.branches.size()) >= params_.max_hyp) break;
      t.branches.push_back(std::move(b));
    }

    if (assigned >= 0) {
      t.hits += 1;
      t.misses = 0;
      if (t.status == TrackStatus::tentative && t.hits >= params_.confirm_hits)
        t.status = TrackStatus::confirmed;
      if (t.status == TrackStatus::confirmed) {
        const BBox box = box_of(t.branches[0].x);
        t.history.emplace_back(frame, box);
        emitted.push_back({frame, t.label, box, cls_});
      }
    } else {
      t.misses += 1;
      t.hits = 0;
      if (t.misses >= params_.delete_misses)
        t.status = TrackStatus::terminated;
    }
  }

  // Unmatched detections start tentative tracks.
  for (std::size_t j = 0; j < dets.size(); ++j) {
    if (det_taken[j]) continue;
    TrackState t;
    t.label = next_label_++;
    t.hits = 1;
    TrackBranch b;
    b.x << z[j](0), z[j](1), 0.0, 0.0, z[j](2), z[j](3);
    b.P = Mat6::Zero();
    b.P(0, 0) = b.P(1, 1) = params_.meas_noise;
    b.P(2, 2) = b.P(3, 3) = kInitVelocityVar;
    b.P(4, 4) = b.P(5, 5) = params_.meas_noise;
    t.branches.push_back(std::move(b));
    tracks_.push_back(std::move(t));
  }

  output_.insert(output_.end(), emitted.begin(), emitted.end());
  return emitted;
}

std::vector<Tracklet> Tracker::run(
    const std::vector<std::vector<Detection>>& frames, long first_frame) {
  for (std::size_t i = 0; i < frames.size(); ++i)
    step(frames[i], first_frame + static_cast<long>(i));
  return tracklets();
}

std::vector<Tracklet> Tracker::tracklets() const {
  std::vector<Tracklet> out;
  for (const auto& t : tracks_) {
    if (t.history.empty()) continue;
    Tracklet tau;
    tau.label = t.label;
    tau.camera = camera_;
    tau.cls = cls_;
    tau.entries = t.history;
    out.push_back(std::move(tau));
  }
  return out;
}

}  // namespace cpt
