#include <doctest.h>

#include <cmath>
#include <random>

#include "cptrack/bagassoc.hpp"

using namespace cpt;

namespace {

TrackOutputEntry entry(long frame, long label, double cx, double cy,
                       ObjectClass cls) {
  return {frame, label, BBox{cx, cy, 40, 40}, cls};
}

TrackOutputEntry person(long frame, long label, double cx, double cy) {
  return entry(frame, label, cx, cy, ObjectClass::person);
}

TrackOutputEntry bag(long frame, long label, double cx, double cy) {
  return entry(frame, label, cx, cy, ObjectClass::bag);
}

}  // namespace

TEST_CASE("a new bag links to the nearest person within range") {
  const TrackOutput persons{person(10, 1, 100, 100), person(10, 2, 300, 100)};
  const TrackOutput bags{bag(10, 50, 120, 100)};
  const auto ledger = associate(persons, bags, AssocConfig{200});
  REQUIRE(ledger.entries.size() == 1);
  CHECK(ledger.entries[0].bag_label == 50);
  CHECK(ledger.entries[0].person_label == 1);
  CHECK(ledger.entries[0].frame_created == 10);
  CHECK(ledger.owner_of(50).value() == 1);
  CHECK(!ledger.owner_of(99).has_value());
}

TEST_CASE("bags beyond the distance threshold stay unassociated") {
  const TrackOutput persons{person(0, 1, 100, 100)};
  const TrackOutput bags{bag(0, 50, 400, 100)};
  CHECK(associate(persons, bags, AssocConfig{200}).entries.empty());
  // Same layout with a larger threshold associates.
  CHECK(associate(persons, bags, AssocConfig{400}).entries.size() == 1);
}

TEST_CASE("an out-of-range bag is retried on later frames") {
  // The person only comes near the bag at frame 5.
  TrackOutput persons, bags;
  for (long f = 0; f <= 8; ++f) {
    persons.push_back(person(f, 1, 800 - 100.0 * f, 100));
    bags.push_back(bag(f, 50, 100, 100));
  }
  const auto ledger = associate(persons, bags, AssocConfig{200});
  REQUIRE(ledger.entries.size() == 1);
  CHECK(ledger.entries[0].person_label == 1);
  CHECK(ledger.entries[0].frame_created == 5);  // first frame within 200 px
}

TEST_CASE("ownership never changes after creation") {
  // Person 1 owns the bag at frame 0; person 2 is closer later.
  TrackOutput persons{person(0, 1, 120, 100), person(5, 2, 100, 100),
                      person(5, 1, 500, 100)};
  TrackOutput bags{bag(0, 50, 100, 100), bag(5, 50, 100, 100)};
  const auto ledger = associate(persons, bags, AssocConfig{200});
  REQUIRE(ledger.entries.size() == 1);
  CHECK(ledger.entries[0].person_label == 1);
  CHECK(ledger.entries[0].frame_created == 0);
}

TEST_CASE("association matches an exhaustive oracle") {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> pos(0, 1000);
  std::uniform_int_distribution<int> np(1, 4), nb(1, 3);
  const AssocConfig cfg{200};
  for (int trial = 0; trial < 200; ++trial) {
    TrackOutput persons, bags;
    const int P = np(rng), B = nb(rng);
    for (long f = 0; f < 5; ++f) {
      for (int i = 0; i < P; ++i)
        persons.push_back(person(f, i + 1, pos(rng), pos(rng)));
      for (int j = 0; j < B; ++j)
        bags.push_back(bag(f, 100 + j, pos(rng), pos(rng)));
    }
    const auto ledger = associate(persons, bags, cfg);

    // Oracle: scan frames in order; first frame where some person is within
    // range of the bag fixes the owner as the nearest such person.
    for (int j = 0; j < B; ++j) {
      const long bl = 100 + j;
      std::optional<OwnershipEntry> expect;
      for (long f = 0; f < 5 && !expect; ++f) {
        const TrackOutputEntry* bg = nullptr;
        for (const auto& e : bags)
          if (e.frame == f && e.label == bl) bg = &e;
        if (!bg) continue;
        double best = cfg.alpha_d;
        long who = 0;
        for (const auto& e : persons) {
          if (e.frame != f) continue;
          const double d = distance(e.box.center(), bg->box.center());
          if (d <= best) {
            best = d;
            who = e.label;
          }
        }
        if (who != 0) expect = OwnershipEntry{who, bl, f};
      }
      const auto got = ledger.owner_of(bl);
      CHECK(got.has_value() == expect.has_value());
      if (got && expect) CHECK(*got == expect->person_label);
    }
    // Uniqueness: at most one entry per bag label.
    for (std::size_t i = 0; i < ledger.entries.size(); ++i)
      for (std::size_t j = i + 1; j < ledger.entries.size(); ++j)
        CHECK(ledger.entries[i].bag_label != ledger.entries[j].bag_label);
  }
}

TEST_CASE("verify_ownership reports matches and mismatches") {
  // Bag 50 owned by person 1 and retrieved by them; bag 51 owned by person 1
  // but ends next to person 2.
  TrackOutput persons{person(0, 1, 100, 100), person(0, 2, 500, 100),
                      person(9, 1, 200, 100), person(9, 2, 600, 100)};
  TrackOutput bags{bag(0, 50, 110, 100), bag(0, 51, 120, 100),
                   bag(9, 50, 210, 100), bag(9, 51, 590, 100)};
  const auto ledger = associate(persons, bags, AssocConfig{200});
  REQUIRE(ledger.entries.size() == 2);
  const auto events = verify_ownership(persons, bags, ledger, AssocConfig{200});
  REQUIRE(events.size() == 2);
  for (const auto& ev : events) {
    if (ev.bag_label == 50) {
      CHECK(ev.person_label == 1);
      CHECK(ev.nearest_person == 1);
      CHECK(ev.match);
    } else {
      CHECK(ev.bag_label == 51);
      CHECK(ev.person_label == 1);
      CHECK(ev.nearest_person == 2);
      CHECK(!ev.match);
    }
  }
}
