#include "cptrack/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <unordered_map>

namespace cpt {

namespace {

Polygon detection_outline(const Detection& d) {
  if (d.footprint) return *d.footprint;
  Polygon p;
  p.vertices = {{d.box.x0(), d.box.y0()},
                {d.box.x1(), d.box.y0()},
                {d.box.x1(), d.box.y1()},
                {d.box.x0(), d.box.y1()}};
  return p;
}

std::uint64_t quantized_key(const BBox& b) {
  const std::array<double, 4> c{b.cx, b.cy, b.w, b.h};
  std::uint64_t k = 1469598103934665603ull;
  for (double v : c) {
    const auto q = static_cast<std::int64_t>(std::llround(v * 1e6));
    auto u = static_cast<std::uint64_t>(q);
    for (int bb = 0; bb < 8; ++bb) {
      k ^= (u >> (8 * bb)) & 0xffu;
      k *= 1099511628211ull;
    }
  }
  return k;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) {
    std::iota(parent.begin(), parent.end(), std::size_t{0});
  }
  std::size_t find(std::size_t i) {
    while (parent[i] != i) {
      parent[i] = parent[parent[i]];
      i = parent[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace

std::vector<Detection> remap_detections(const std::vector<Detection>& dets,
                                        double theta, const Roi& roi) {
  const Point2 c_roi = roi.center();
  const Point2 c_local{0.5 * roi.rw, 0.5 * roi.rh};
  const Point2 shift = c_roi - c_local;

  std::vector<Detection> out;
  out.reserve(dets.size());
  for (const Detection& d : dets) {
    Detection r = d;
    Polygon poly = detection_outline(d);
    for (auto& v : poly.vertices)
      v = rotate_point(v + shift, -theta, c_roi);
    r.box = polygon_bbox(poly);
    if (d.footprint)
      r.footprint = std::move(poly);
    out.push_back(std::move(r));
  }
  return out;
}

std::array<double, 4> bandwidth(const std::vector<Detection>& dets,
                                const std::array<double, 4>& floor) {
  if (dets.empty())
    throw ValidationError("bandwidth: empty detection set");
  const std::size_t m = dets.size();
  std::array<double, 4> mean{0, 0, 0, 0};
  for (const auto& d : dets) {
    mean[0] += d.box.cx;
    mean[1] += d.box.cy;
    mean[2] += d.box.w;
    mean[3] += d.box.h;
  }
  for (auto& v : mean) v /= static_cast<double>(m);

  std::array<double, 4> var{0, 0, 0, 0};
  if (m > 1) {
    for (const auto& d : dets) {
      const std::array<double, 4> c{d.box.cx, d.box.cy, d.box.w, d.box.h};
      for (int k = 0; k < 4; ++k) var[k] += (c[k] - mean[k]) * (c[k] - mean[k]);
    }
    for (auto& v : var) v /= static_cast<double>(m - 1);
  }
  for (int k = 0; k < 4; ++k) var[k] = std::max(var[k], floor[k]);
  return var;
}

std::vector<Cluster> mean_shift(const std::vector<Detection>& dets,
                                const std::array<double, 4>& h,
                                double convergence_eps, int max_iters,
                                double merge_radius) {
  for (double v : h)
    if (!(v > 0.0))
      throw ValidationError("mean_shift: bandwidth components must be > 0");
  if (dets.empty()) return {};

  using Vec4 = std::array<double, 4>;
  auto point_of = [](const Detection& d) -> Vec4 {
    return {d.box.cx, d.box.cy, d.box.w, d.box.h};
  };

  // Coincident detections (common after remapping noise-free rotations)
  // collapse into one weighted sample; the kernel sums are unchanged.
  struct Unique {
    Vec4 c;
    double weight = 0.0;
  };
  std::vector<Unique> uniq;
  std::vector<std::size_t> uniq_of_det(dets.size());
  std::unordered_map<std::uint64_t, std::size_t> index;
  index.reserve(dets.size() * 2);
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const Vec4 c = point_of(dets[i]);
    const auto [it, inserted] = index.try_emplace(quantized_key(dets[i].box), uniq.size());
    if (inserted) uniq.push_back({c, 0.0});
    uniq[it->second].weight += 1.0;
    uniq_of_det[i] = it->second;
  }

  // Iterate every sample to its mode.
  std::vector<Vec4> modes(uniq.size());
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    Vec4 x = uniq[i].c;
    for (int it = 0; it < max_iters; ++it) {
      Vec4 num{0, 0, 0, 0};
      double den = 0.0;
      for (const auto& u : uniq) {
        double e = 0.0;
        for (int k = 0; k < 4; ++k) {
          const double d = u.c[k] - x[k];
          e += d * d / h[k];
        }
        if (e > 60.0) continue;  // weight below ~1e-13
        const double w = u.weight * std::exp(-0.5 * e);
        for (int k = 0; k < 4; ++k) num[k] += w * u.c[k];
        den += w;
      }
      Vec4 next = x;
      if (den > 0.0)
        for (int k = 0; k < 4; ++k) next[k] = num[k] / den;
      double disp = 0.0;
      for (int k = 0; k < 4; ++k)
        disp += (next[k] - x[k]) * (next[k] - x[k]);
      x = next;
      if (std::sqrt(disp) < convergence_eps) break;
    }
    modes[i] = x;
  }

  // Samples whose modes coincide (within merge_radius in sqrt(h) units)
  // share a cluster.
  UnionFind uf(uniq.size());
  for (std::size_t i = 0; i < uniq.size(); ++i) {
    for (std::size_t j = i + 1; j < uniq.size(); ++j) {
      double e = 0.0;
      for (int k = 0; k < 4; ++k) {
        const double d = modes[i][k] - modes[j][k];
        e += d * d / h[k];
      }
      if (std::sqrt(e) <= merge_radius) uf.unite(i, j);
    }
  }

  std::unordered_map<std::size_t, std::size_t> cluster_of_root;
  std::vector<Cluster> clusters;
  std::vector<std::vector<std::size_t>> member_src;  // original indices
  for (std::size_t i = 0; i < dets.size(); ++i) {
    const std::size_t root = uf.find(uniq_of_det[i]);
    const auto [it, inserted] = cluster_of_root.try_emplace(root, clusters.size());
    if (inserted) {
      clusters.emplace_back();
      member_src.emplace_back();
    }
    clusters[it->second].members.push_back(dets[i]);
    member_src[it->second].push_back(i);
  }

  // Mode member: highest score; ties go to the smaller angle index, then
  // input order.
  for (auto& q : clusters) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < q.members.size(); ++i) {
      const Detection& a = q.members[i];
      const Detection& b = q.members[best];
      const int ai = a.angle_index.value_or(0);
      const int bi = b.angle_index.value_or(0);
      if (a.score > b.score || (a.score == b.score && ai < bi)) best = i;
    }
    q.mode = best;
  }
  return clusters;
}

double cluster_score(const Cluster& q, int n) {
  if (n < 1)
    throw ValidationError("cluster_score: rotation count must be >= 1");
  double s = 0.0;
  for (const auto& d : q.members) s += d.score;
  return s / static_cast<double>(n);
}

std::vector<Detection> fuse_frame(const AugmentedFrame& af, ObjectClass cls,
                                  const FusionConfig& cfg) {
  if (static_cast<int>(af.per_angle.size()) != cfg.n)
    throw ValidationError("fuse_frame: augmented frame has " +
                          std::to_string(af.per_angle.size()) +
                          " angle slots, config expects " +
                          std::to_string(cfg.n));
  std::vector<Detection> pooled;
  for (int i = 0; i < cfg.n; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / cfg.n;
    std::vector<Detection> slot;
    for (const Detection& d : af.per_angle[i])
      if (d.cls == cls) slot.push_back(d);
    auto remapped = remap_detections(slot, theta, af.roi);
    pooled.insert(pooled.end(), remapped.begin(), remapped.end());
  }
  if (pooled.empty()) return {};

  // Estimate the kernel scale per spatially connected group of detections
  // (overlap linkage). A frame-wide variance is dominated by the spread
  // between distinct objects and would smooth them into a single mode.
  std::vector<std::size_t> rep;                 // unique box -> pooled index
  std::vector<std::size_t> uniq_of(pooled.size());
  std::unordered_map<std::uint64_t, std::size_t> seen;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    const auto [it, inserted] =
        seen.try_emplace(quantized_key(pooled[i].box), rep.size());
    if (inserted) rep.push_back(i);
    uniq_of[i] = it->second;
  }
  UnionFind uf(rep.size());
  for (std::size_t i = 0; i < rep.size(); ++i)
    for (std::size_t j = i + 1; j < rep.size(); ++j)
      if (iou(pooled[rep[i]].box, pooled[rep[j]].box) > 0.0) uf.unite(i, j);

  std::unordered_map<std::size_t, std::size_t> group_of_root;
  std::vector<std::vector<Detection>> groups;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    const std::size_t root = uf.find(uniq_of[i]);
    const auto [it, inserted] = group_of_root.try_emplace(root, groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(pooled[i]);
  }

  std::vector<Cluster> clusters;
  for (const auto& group : groups) {
    const auto h = bandwidth(group, cfg.bandwidth_floor);
    auto part = mean_shift(group, h, cfg.convergence_eps, cfg.max_iters,
                           cfg.merge_radius);
    clusters.insert(clusters.end(), std::make_move_iterator(part.begin()),
                    std::make_move_iterator(part.end()));
  }

  std::vector<Detection> out;
  for (auto& q : clusters) {
    q.score_bar = cluster_score(q, cfg.n);
    if (q.score_bar < cfg.lambda) continue;
    Detection d = q.members[q.mode];
    d.angle_index.reset();
    out.push_back(std::move(d));
  }
  return out;
}

}  // namespace cpt
