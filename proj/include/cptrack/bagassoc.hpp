#pragma once

#include <optional>
#include <vector>

#include "cptrack/tracker.hpp"

namespace cpt {

struct AssocConfig {
  double alpha_d = 200.0;  // pixels
};

struct OwnershipEntry {
  long person_label = 0;
  long bag_label = 0;
  long frame_created = 0;
};

struct AssociationLedger {
  std::vector<OwnershipEntry> entries;  // at most one per bag label

  std::optional<long> owner_of(long bag_label) const;
};

// Scans frames in order; when a bag label appears, it is linked to the
// nearest person (center distance <= alpha_d) and the entry never changes.
// Bags with no qualifying person are re-tested every following frame until
// an entry is created or the bag track ends.
AssociationLedger associate(const TrackOutput& persons, const TrackOutput& bags,
                            const AssocConfig& cfg);

struct OwnershipEvent {
  long bag_label = 0;
  long person_label = 0;       // ledger owner, 0 if unassociated
  long nearest_person = 0;     // nearest person at the bag's last frame, 0 if none
  bool match = false;
};

// Retrieval check: compares each bag's ledger owner against the person
// nearest to the bag track's final position.
std::vector<OwnershipEvent> verify_ownership(const TrackOutput& persons,
                                             const TrackOutput& bags,
                                             const AssociationLedger& ledger,
                                             const AssocConfig& cfg);

}  // namespace cpt
