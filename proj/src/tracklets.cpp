#include "cptrack/tracklets.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "cptrack/assignment.hpp"

namespace cpt {

double stitch_cost(const Tracklet& tau_m, const Tracklet& tau_n, long t_th) {
  if (tau_m.cls != tau_n.cls || tau_m.camera != tau_n.camera) return kInfCost;
  const long gap = tau_m.entries.front().first - tau_n.entries.back().first;
  if (gap <= 0 || gap > t_th) return kInfCost;
  return 1.0 - iou(tau_m.entries.front().second, tau_n.entries.back().second);
}

std::vector<Tracklet> stitch(std::vector<Tracklet> ts, const StitchConfig& cfg) {
  if (cfg.t_th <= 0)
    throw ValidationError("stitch: t_th must be > 0");
  for (const auto& t : ts)
    if (t.camera != ts.front().camera)
      throw ValidationError("stitch: tracklets span multiple cameras");

  while (ts.size() > 1) {
    const std::size_t n = ts.size();
    CostMatrix cm(n, n, kInfCost);
    for (std::size_t m = 0; m < n; ++m)
      for (std::size_t k = 0; k < n; ++k) {
        if (m == k) continue;
        // Fragments whose boundary boxes do not overlap at all are not
        // merge candidates even inside the temporal window.
        const double c = stitch_cost(ts[m], ts[k], cfg.t_th);
        if (c < 1.0) cm.at(m, k) = c;
      }

    const Assignment assn = solve(cm);
    if (assn.pairs.empty()) break;

    // Matched pairs form chains (each index appears at most once per side);
    // merge each chain into one tracklet.
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t i) {
      while (parent[i] != i) i = parent[i] = parent[parent[i]];
      return i;
    };
    for (const auto& [m, k] : assn.pairs) {
      const std::size_t a = find(m), b = find(k);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }

    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);

    std::vector<Tracklet> merged;
    for (auto& [root, members] : groups) {
      std::sort(members.begin(), members.end(), [&](std::size_t a, std::size_t b) {
        return ts[a].entries.front().first < ts[b].entries.front().first;
      });
      Tracklet t = ts[members.front()];  // earliest fragment keeps its label
      for (std::size_t i = 1; i < members.size(); ++i) {
        const auto& src = ts[members[i]].entries;
        t.entries.insert(t.entries.end(), src.begin(), src.end());
      }
      merged.push_back(std::move(t));
    }
    ts = std::move(merged);
  }
  return ts;
}

double handoff_cost(const Tracklet& tau_a_proj, const Tracklet& tau_p,
                    double d_max) {
  std::map<long, Point2> p_by_frame;
  for (const auto& [f, box] : tau_p.entries) p_by_frame[f] = box.center();

  std::vector<Point2> pa, pp;
  for (const auto& [f, box] : tau_a_proj.entries) {
    const auto it = p_by_frame.find(f);
    if (it == p_by_frame.end()) continue;
    pa.push_back(box.center());
    pp.push_back(it->second);
  }
  if (pa.empty()) return kInfCost;
  const double d = hausdorff(pp, pa);
  return d < d_max ? d : kInfCost;
}

HandoffResult associate_cameras(const std::vector<Tracklet>& primary,
                                const std::vector<Tracklet>& auxiliary,
                                const HandoffConfig& cfg) {
  if (!(cfg.d_max > 0))
    throw ValidationError("associate_cameras: d_max must be > 0");

  std::vector<Tracklet> aux_proj = auxiliary;
  for (auto& t : aux_proj)
    for (auto& [f, box] : t.entries) {
      const Point2 c = project_point(cfg.homography, box.center());
      box.cx = c.x;
      box.cy = c.y;
    }

  CostMatrix cm(aux_proj.size(), primary.size(), kInfCost);
  for (std::size_t a = 0; a < aux_proj.size(); ++a)
    for (std::size_t p = 0; p < primary.size(); ++p)
      if (aux_proj[a].cls == primary[p].cls)
        cm.at(a, p) = handoff_cost(aux_proj[a], primary[p], cfg.d_max);

  HandoffResult result;
  result.primary = primary;
  result.graph.primary_count = primary.size();
  result.graph.aux_count = auxiliary.size();

  // Repeated assignment rounds. A matched pair invalidates only the costs
  // of tracklets that temporally overlap it, so a tracklet stays available
  // for temporally disjoint fragments of the same target (re-entries).
  const auto spans_overlap = [](const Tracklet& x, const Tracklet& y) {
    return x.entries.front().first <= y.entries.back().first &&
           y.entries.front().first <= x.entries.back().first;
  };
  while (true) {
    const Assignment assn = solve(cm);
    if (assn.pairs.empty()) break;
    for (const auto& [a, p] : assn.pairs) {
      result.graph.edges.emplace_back(a, p);
      for (std::size_t i = 0; i < cm.rows; ++i)
        if (spans_overlap(aux_proj[i], aux_proj[a])) cm.at(i, p) = kInfCost;
      for (std::size_t j = 0; j < cm.cols; ++j)
        if (spans_overlap(primary[j], primary[p])) cm.at(a, j) = kInfCost;
    }
  }

  // Label propagation: every node reachable from a primary tracklet takes
  // the numerically smallest label of its component.
  const std::size_t np = primary.size();
  const std::size_t total = np + auxiliary.size();
  std::vector<std::vector<std::size_t>> adj(total);
  for (const auto& [a, p] : result.graph.edges) {
    adj[p].push_back(np + a);
    adj[np + a].push_back(p);
  }
  std::vector<char> visited(total, 0);
  for (std::size_t start = 0; start < np; ++start) {
    if (visited[start]) continue;
    std::vector<std::size_t> stack{start}, component;
    visited[start] = 1;
    while (!stack.empty()) {
      const std::size_t v = stack.back();
      stack.pop_back();
      component.push_back(v);
      for (std::size_t w : adj[v])
        if (!visited[w]) {
          visited[w] = 1;
          stack.push_back(w);
        }
    }
    long min_label = std::numeric_limits<long>::max();
    for (std::size_t v : component) {
      const long l = v < np ? primary[v].label : auxiliary[v - np].label;
      min_label = std::min(min_label, l);
    }
    for (std::size_t v : component)
      if (v < np) result.primary[v].label = min_label;
  }
  return result;
}

}  // namespace cpt
