#include "cptrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cptrack/assignment.hpp"

namespace cpt {

std::vector<long> GroundTruth::annotated_frames() const {
  std::vector<long> out;
  out.reserve(frames.size());
  for (const auto& [f, _] : frames) out.push_back(f);
  return out;
}

FrameMatch match_frame(const std::vector<BBox>& gt, const std::vector<BBox>& hyp,
                       double iou_thr) {
  CostMatrix cm(gt.size(), hyp.size(), kInfCost);
  for (std::size_t i = 0; i < gt.size(); ++i)
    for (std::size_t j = 0; j < hyp.size(); ++j) {
      const double v = iou(gt[i], hyp[j]);
      if (v >= iou_thr) cm.at(i, j) = 1.0 - v;
    }
  const Assignment assn = solve(cm);

  FrameMatch fm;
  std::vector<char> gt_used(gt.size(), 0), hyp_used(hyp.size(), 0);
  for (const auto& [i, j] : assn.pairs) {
    fm.matches.emplace_back(i, j);
    gt_used[i] = 1;
    hyp_used[j] = 1;
  }
  for (std::size_t j = 0; j < hyp.size(); ++j)
    if (!hyp_used[j]) fm.fp.push_back(j);
  for (std::size_t i = 0; i < gt.size(); ++i)
    if (!gt_used[i]) fm.fn.push_back(i);
  return fm;
}

namespace {

void finalize_ratios(EvalReport& r) {
  const long hyp_total = r.tp + r.fp;
  r.rcll = r.gt_total > 0 ? double(r.tp) / double(r.gt_total) : 0.0;
  r.prcn = hyp_total > 0 ? double(r.tp) / double(hyp_total) : 1.0;
  r.moda = r.gt_total > 0 ? 1.0 - double(r.fp + r.fn) / double(r.gt_total) : 1.0;
  r.mota =
      r.gt_total > 0 ? 1.0 - double(r.fp + r.fn + r.ids) / double(r.gt_total) : 1.0;
  r.far = r.frames > 0 ? double(r.fp) / double(r.frames) : 0.0;
  const long idh = r.idtp + r.idfp;
  const long idg = r.idtp + r.idfn;
  r.idp = idh > 0 ? double(r.idtp) / double(idh) : 1.0;
  r.idr = idg > 0 ? double(r.idtp) / double(idg) : 1.0;
  r.idf1 = (idh + idg) > 0 ? 2.0 * double(r.idtp) / double(idh + idg) : 1.0;
}

}  // namespace

EvalReport report_from_counts(long tp, long fp, long fn, long ids, long gt_total) {
  EvalReport r;
  r.tp = tp;
  r.fp = fp;
  r.fn = fn;
  r.ids = ids;
  r.gt_total = gt_total;
  finalize_ratios(r);
  return r;
}

EvalReport evaluate_detection(const GroundTruth& gt,
                              const std::vector<Detection>& hyp, double iou_thr) {
  std::map<long, std::vector<BBox>> hyp_by_frame;
  for (const auto& d : hyp) hyp_by_frame[d.frame].push_back(d.box);
  // Canonical within-frame order so metrics do not depend on input order.
  for (auto& [f, boxes] : hyp_by_frame)
    std::sort(boxes.begin(), boxes.end(), [](const BBox& a, const BBox& b) {
      return std::tie(a.cx, a.cy, a.w, a.h) < std::tie(b.cx, b.cy, b.w, b.h);
    });

  EvalReport r;
  for (const auto& [frame, gts] : gt.frames) {
    r.frames += 1;
    std::vector<BBox> gt_boxes;
    for (const auto& g : gts) gt_boxes.push_back(g.box);
    r.gt_total += static_cast<long>(gt_boxes.size());
    const auto hit = hyp_by_frame.find(frame);
    const std::vector<BBox> hyp_boxes =
        hit == hyp_by_frame.end() ? std::vector<BBox>{} : hit->second;
    const FrameMatch fm = match_frame(gt_boxes, hyp_boxes, iou_thr);
    r.tp += static_cast<long>(fm.matches.size());
    r.fp += static_cast<long>(fm.fp.size());
    r.fn += static_cast<long>(fm.fn.size());
  }
  finalize_ratios(r);
  return r;
}

EvalReport evaluate_tracking(const GroundTruth& gt, const TrackOutput& hyp,
                             double iou_thr) {
  struct HypBox {
    long label;
    BBox box;
  };
  std::map<long, std::vector<HypBox>> hyp_by_frame;
  for (const auto& e : hyp) hyp_by_frame[e.frame].push_back({e.label, e.box});
  for (auto& [f, v] : hyp_by_frame)
    std::sort(v.begin(), v.end(),
              [](const HypBox& a, const HypBox& b) { return a.label < b.label; });

  EvalReport r;
  double iou_sum = 0.0;
  std::map<long, long> last_label;           // gt id -> last matched hyp label
  std::map<long, std::pair<long, long>> coverage;  // gt id -> (span, covered)

  for (const auto& [frame, gts] : gt.frames) {
    r.frames += 1;
    r.gt_total += static_cast<long>(gts.size());
    const auto hit = hyp_by_frame.find(frame);
    const std::vector<HypBox> hyps =
        hit == hyp_by_frame.end() ? std::vector<HypBox>{} : hit->second;

    std::vector<char> gt_done(gts.size(), 0), hyp_done(hyps.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> matches;

    // Keep valid correspondences from earlier frames first.
    for (std::size_t i = 0; i < gts.size(); ++i) {
      const auto it = last_label.find(gts[i].id);
      if (it == last_label.end()) continue;
      for (std::size_t j = 0; j < hyps.size(); ++j) {
        if (hyp_done[j] || hyps[j].label != it->second) continue;
        if (iou(gts[i].box, hyps[j].box) >= iou_thr) {
          matches.emplace_back(i, j);
          gt_done[i] = 1;
          hyp_done[j] = 1;
        }
        break;
      }
    }

    // Optimal matching over the remainder.
    std::vector<std::size_t> gi, hj;
    std::vector<BBox> gb, hb;
    for (std::size_t i = 0; i < gts.size(); ++i)
      if (!gt_done[i]) {
        gi.push_back(i);
        gb.push_back(gts[i].box);
      }
    for (std::size_t j = 0; j < hyps.size(); ++j)
      if (!hyp_done[j]) {
        hj.push_back(j);
        hb.push_back(hyps[j].box);
      }
    const FrameMatch fm = match_frame(gb, hb, iou_thr);
    for (const auto& [a, b] : fm.matches) matches.emplace_back(gi[a], hj[b]);

    for (const auto& [i, j] : matches) {
      r.tp += 1;
      iou_sum += iou(gts[i].box, hyps[j].box);
      const long id = gts[i].id;
      const auto it = last_label.find(id);
      if (it != last_label.end() && it->second != hyps[j].label) r.ids += 1;
      last_label[id] = hyps[j].label;
    }
    r.fn += static_cast<long>(gts.size() - matches.size());
    r.fp += static_cast<long>(hyps.size() - matches.size());

    std::set<std::size_t> matched_gt;
    for (const auto& [i, j] : matches) matched_gt.insert(i);
    for (std::size_t i = 0; i < gts.size(); ++i) {
      auto& cov = coverage[gts[i].id];
      cov.first += 1;
      if (matched_gt.count(i)) cov.second += 1;
    }
  }

  r.motp = r.tp > 0 ? iou_sum / double(r.tp) : 0.0;
  long mt = 0, ml = 0;
  for (const auto& [id, cov] : coverage) {
    const double ratio = cov.first > 0 ? double(cov.second) / double(cov.first) : 0;
    if (ratio >= 0.8) mt += 1;
    if (ratio < 0.2) ml += 1;
  }
  if (!coverage.empty()) {
    r.mt = double(mt) / double(coverage.size());
    r.ml = double(ml) / double(coverage.size());
  }
  finalize_ratios(r);
  return r;
}

EvalReport evaluate_identity(const GroundTruth& gt, const TrackOutput& hyp,
                             double iou_thr) {
  std::map<long, std::vector<TrackOutputEntry>> hyp_by_frame;
  for (const auto& e : hyp) hyp_by_frame[e.frame].push_back(e);

  std::map<long, long> gt_len, hyp_len;
  std::map<std::pair<long, long>, long> overlap;
  for (const auto& [frame, gts] : gt.frames) {
    const auto hit = hyp_by_frame.find(frame);
    for (const auto& g : gts) gt_len[g.id] += 1;
    if (hit == hyp_by_frame.end()) continue;
    for (const auto& h : hit->second) {
      hyp_len[h.label] += 1;
      for (const auto& g : gts)
        if (iou(g.box, h.box) >= iou_thr) overlap[{g.id, h.label}] += 1;
    }
  }

  std::vector<long> gt_ids, hyp_ids;
  for (const auto& [id, _] : gt_len) gt_ids.push_back(id);
  for (const auto& [id, _] : hyp_len) hyp_ids.push_back(id);
  const std::size_t G = gt_ids.size(), H = hyp_ids.size();

  // Square matrix with unmatched options on the diagonal blocks.
  CostMatrix cm(G + H, H + G, kInfCost);
  for (std::size_t i = 0; i < G; ++i)
    for (std::size_t j = 0; j < H; ++j) {
      const auto it = overlap.find({gt_ids[i], hyp_ids[j]});
      const long ov = it == overlap.end() ? 0 : it->second;
      cm.at(i, j) = double(gt_len[gt_ids[i]] + hyp_len[hyp_ids[j]] - 2 * ov);
    }
  for (std::size_t i = 0; i < G; ++i) cm.at(i, H + i) = double(gt_len[gt_ids[i]]);
  for (std::size_t j = 0; j < H; ++j) cm.at(G + j, j) = double(hyp_len[hyp_ids[j]]);
  for (std::size_t j = 0; j < H; ++j)
    for (std::size_t i = 0; i < G; ++i) cm.at(G + j, H + i) = 0.0;

  const Assignment assn = solve(cm);

  EvalReport r;
  long total_gt = 0, total_hyp = 0;
  for (const auto& [_, n] : gt_len) total_gt += n;
  for (const auto& [_, n] : hyp_len) total_hyp += n;
  for (const auto& [i, j] : assn.pairs) {
    if (i >= G || j >= H) continue;
    const auto it = overlap.find({gt_ids[i], hyp_ids[j]});
    if (it != overlap.end()) r.idtp += it->second;
  }
  r.idfn = total_gt - r.idtp;
  r.idfp = total_hyp - r.idtp;
  r.gt_total = total_gt;
  r.frames = static_cast<long>(gt.frames.size());
  finalize_ratios(r);
  return r;
}

}  // namespace cpt
