#include "doctest.h"

#include <algorithm>
#include <random>
#include <set>

#include "fedar/errors.hpp"
#include "fedar/resource.hpp"
#include "fedar/rng.hpp"
#include "fedar/selection.hpp"

using namespace fedar;
using resource::ResourceProfile;
using resource::ResourceTracker;

TEST_CASE("check_resource") {
  const ResourceProfile req{256, 10, 20};
  CHECK(resource::check_resource(req, req));
  CHECK_FALSE(resource::check_resource({255.9, 10, 20}, req));
  CHECK_FALSE(resource::check_resource({256, 9, 20}, req));
  CHECK_FALSE(resource::check_resource({256, 10, 19.5}, req));
  CHECK(resource::check_resource({0, 0, 0}, {0, 0, 0}));
  CHECK(resource::check_resource({1, 2, 3}, {}));
}

TEST_CASE("check_resource is monotone") {
  Rng rng(1);
  std::uniform_real_distribution<double> u(0, 100);
  for (int i = 0; i < 2000; ++i) {
    const ResourceProfile req{u(rng), u(rng), u(rng)};
    ResourceProfile avail{u(rng), u(rng), u(rng)};
    const bool before = resource::check_resource(avail, req);
    avail.memory_mb += u(rng);
    avail.battery_pct += u(rng);
    if (before) CHECK(resource::check_resource(avail, req));
  }
}

TEST_CASE("tracker: static without noise or participation") {
  const ResourceProfile p{512, 50, 90};
  const ResourceTracker t(p, {});
  for (int round = 1; round < 5; ++round) CHECK(t.availability(round) == p);
}

TEST_CASE("tracker: battery drain") {
  ResourceTracker t({512, 50, 100}, {5.0, false, 0});
  for (int i = 0; i < 3; ++i) t.record_participation();
  CHECK(t.availability(4).battery_pct == 85.0);
  for (int i = 0; i < 30; ++i) t.record_participation();
  CHECK(t.availability(34).battery_pct == 0.0);
}

TEST_CASE("tracker: seeded fluctuation") {
  const ResourceProfile p{1000, 100, 80};
  const ResourceTracker a(p, {0.0, true, 9});
  const ResourceTracker b(p, {0.0, true, 9});
  const ResourceTracker c(p, {0.0, true, 10});
  bool differs = false;
  for (int round = 1; round <= 50; ++round) {
    const auto av = a.availability(round);
    CHECK(av == b.availability(round));
    differs = differs || !(av == c.availability(round));
    CHECK(av.memory_mb >= 800.0);
    CHECK(av.memory_mb <= 1000.0);
    CHECK(av.bandwidth_mbps >= 80.0);
    CHECK(av.bandwidth_mbps <= 100.0);
    CHECK(av.battery_pct == 80.0);
  }
  CHECK(differs);
}

TEST_CASE("profile and task validation") {
  CHECK_THROWS_AS((ResourceProfile{-1, 0, 0}.validate()), ConfigError);
  CHECK_THROWS_AS((ResourceProfile{0, 0, 101}.validate()), ConfigError);
  resource::TaskSpec t;
  CHECK_NOTHROW(t.validate());
  t.client_fraction = 0.0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t.client_fraction = 1.0;
  t.timeout = 0.0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
  t.timeout = 1.0;
  t.gamma = 0.0;
  CHECK_THROWS_AS(t.validate(), ConfigError);
}

TEST_CASE("timeout schedule") {
  resource::TaskSpec t;
  t.timeout = 4.0;
  t.timeout_schedule = {8.0, 6.0};
  CHECK(t.timeout_for_round(1) == 8.0);
  CHECK(t.timeout_for_round(2) == 6.0);
  CHECK(t.timeout_for_round(3) == 4.0);
}

TEST_CASE("eligible: filter and sort") {
  const trust::Snapshot s{{"a", 58}, {"b", 50}, {"c", 42}};
  CHECK(selection::eligible(s, {"a", "b", "c"}, 45) ==
        std::vector<std::string>{"a", "b"});
  const trust::Snapshot tie{{"z", 50}, {"b", 50}, {"m", 50}, {"q", 60}};
  CHECK(selection::eligible(tie, {"z", "m", "b", "q"}, 0) ==
        std::vector<std::string>{"q", "b", "m", "z"});
  CHECK(selection::eligible(s, {}, 0).empty());
  // Not in RA, not eligible.
  CHECK(selection::eligible(s, {"c"}, 0) == std::vector<std::string>{"c"});
}

TEST_CASE("select_participants") {
  std::vector<std::string> s;
  for (int i = 0; i < 10; ++i) s.push_back("c" + std::to_string(i));

  const auto half = selection::select_participants(s, 0.5, 1.0, 7);
  CHECK(half.participants == std::vector<std::string>(s.begin(), s.begin() + 5));
  CHECK(half.interested == std::vector<std::string>(s.begin() + 5, s.end()));

  const auto all = selection::select_participants(s, 1.0, 1.0, 7);
  CHECK(all.participants == s);
  CHECK(all.interested.empty());

  // 10 * 0.3 must give 3 despite floating point.
  CHECK(selection::select_participants(s, 0.3, 1.0, 1).candidates.size() == 3);
  // Tiny fraction still yields one candidate.
  CHECK(selection::select_participants(s, 1e-6, 1.0, 1).candidates.size() == 1);

  const auto sub = selection::select_participants(s, 1.0, 0.45, 99);
  CHECK(sub.participants.size() == 4);
  CHECK(sub.participants == selection::select_participants(s, 1.0, 0.45, 99).participants);
  CHECK(std::is_sorted(sub.participants.begin(), sub.participants.end()));

  std::set<std::vector<std::string>> seen;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    seen.insert(selection::select_participants(s, 1.0, 0.3, seed).participants);
  }
  CHECK(seen.size() > 1);

  const auto none = selection::select_participants({}, 0.5, 1.0, 1);
  CHECK(none.participants.empty());
  CHECK(none.candidates.empty());
}
