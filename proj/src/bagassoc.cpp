#include "cptrack/bagassoc.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace cpt {

std::optional<long> AssociationLedger::owner_of(long bag_label) const {
  for (const auto& e : entries)
    if (e.bag_label == bag_label) return e.person_label;
  return std::nullopt;
}

namespace {

// frame -> (label -> center)
using FrameIndex = std::map<long, std::map<long, Point2>>;

FrameIndex index_output(const TrackOutput& out) {
  FrameIndex idx;
  for (const auto& e : out) idx[e.frame][e.label] = e.box.center();
  return idx;
}

// Nearest person within alpha_d; ties go to the smaller label.
std::optional<long> nearest_person(const std::map<long, Point2>& persons,
                                   Point2 at, double alpha_d) {
  std::optional<long> best;
  double best_d = alpha_d;
  for (const auto& [label, c] : persons) {
    const double d = distance(c, at);
    if (d < best_d || (d == best_d && !best)) {
      best_d = d;
      best = label;
    }
  }
  return best;
}

}  // namespace

AssociationLedger associate(const TrackOutput& persons, const TrackOutput& bags,
                            const AssocConfig& cfg) {
  if (!(cfg.alpha_d > 0))
    throw ValidationError("associate: alpha_d must be > 0");
  const FrameIndex person_idx = index_output(persons);
  const FrameIndex bag_idx = index_output(bags);

  AssociationLedger ledger;
  std::set<long> associated;
  for (const auto& [frame, bags_here] : bag_idx) {
    const auto pit = person_idx.find(frame);
    for (const auto& [bag_label, bag_center] : bags_here) {
      if (associated.count(bag_label)) continue;
      if (pit == person_idx.end()) continue;
      const auto owner = nearest_person(pit->second, bag_center, cfg.alpha_d);
      if (!owner) continue;
      ledger.entries.push_back({*owner, bag_label, frame});
      associated.insert(bag_label);
    }
  }
  return ledger;
}

std::vector<OwnershipEvent> verify_ownership(const TrackOutput& persons,
                                             const TrackOutput& bags,
                                             const AssociationLedger& ledger,
                                             const AssocConfig& cfg) {
  const FrameIndex person_idx = index_output(persons);

  // Final observation per bag label.
  std::map<long, std::pair<long, Point2>> last_seen;
  for (const auto& e : bags) {
    auto& slot = last_seen[e.label];
    if (slot.first <= e.frame) slot = {e.frame, e.box.center()};
  }

  std::vector<OwnershipEvent> events;
  for (const auto& [bag_label, at] : last_seen) {
    OwnershipEvent ev;
    ev.bag_label = bag_label;
    if (const auto owner = ledger.owner_of(bag_label)) ev.person_label = *owner;
    const auto pit = person_idx.find(at.first);
    if (pit != person_idx.end()) {
      if (const auto near = nearest_person(pit->second, at.second, cfg.alpha_d))
        ev.nearest_person = *near;
    }
    ev.match = ev.person_label != 0 && ev.person_label == ev.nearest_person;
    events.push_back(ev);
  }
  return events;
}

}  // namespace cpt
