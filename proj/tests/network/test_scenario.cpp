#include <set>
#include <vector>

#include "doctest.h"
#include "iscc/common/errors.hpp"
#include "iscc/common/rng.hpp"
#include "iscc/network/scenario.hpp"

using namespace iscc;
using namespace iscc::network;

TEST_CASE("defaults describe a valid scenario") {
  const NetworkScenario sc;
  CHECK_NOTHROW(sc.validate());
  CHECK(sc.ticks() == 6000);
  CHECK(sc.sensing_range_m == doctest::Approx(1.2 * sc.comm_range_m));
}

TEST_CASE("validation rejects out-of-domain fields") {
  const NetworkScenario good;

  auto broken = [&](auto mutate) {
    NetworkScenario sc = good;
    mutate(sc);
    return sc;
  };

  CHECK_THROWS_AS(broken([](auto& s) { s.arena.y = 0.0; }).validate(),
                  InvalidInput);
  CHECK_THROWS_AS(broken([](auto& s) { s.node_count = 1; }).validate(),
                  InvalidInput);
  CHECK_THROWS_AS(broken([](auto& s) { s.speed_min_mps = 0.0; }).validate(),
                  InvalidInput);
  CHECK_THROWS_AS(broken([](auto& s) { s.speed_max_mps = 1.0; }).validate(),
                  InvalidInput);
  CHECK_THROWS_AS(broken([](auto& s) { s.comm_range_m = -1.0; }).validate(),
                  InvalidInput);
  CHECK_THROWS_AS(broken([](auto& s) { s.sensing_range_m = 100.0; }).validate(),
                  InvalidInput);
  CHECK_THROWS_AS(broken([](auto& s) { s.sensing_period_s = 0.0; }).validate(),
                  InvalidInput);
  CHECK_THROWS_AS(
      broken([](auto& s) { s.sensing_noise_std_m = -0.1; }).validate(),
      InvalidInput);
  CHECK_THROWS_AS(broken([](auto& s) { s.tick_s = 0.0; }).validate(),
                  InvalidInput);
  CHECK_THROWS_AS(broken([](auto& s) { s.duration_s = -5.0; }).validate(),
                  InvalidInput);
  CHECK_THROWS_AS(
      broken([](auto& s) { s.beacon_airtime_s = -0.001; }).validate(),
      InvalidInput);
  CHECK_THROWS_AS(broken([](auto& s) { s.hysteresis_m = -2.0; }).validate(),
                  InvalidInput);
}

TEST_CASE("neighbor sets match a direct pairwise check") {
  NetworkScenario sc;
  Rng rng(41);
  for (int rep = 0; rep < 40; ++rep) {
    const auto n = static_cast<std::size_t>(rng.uniform_int(2, 25));
    std::vector<Vec3> positions(n);
    for (auto& p : positions) {
      p = {rng.uniform(0.0, sc.arena.x), rng.uniform(0.0, sc.arena.y),
           rng.uniform(0.0, sc.arena.z)};
    }

    const auto sets = true_neighbor_sets(positions, sc);
    REQUIRE(sets.size() == n);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(sets[i].count(i) == 0);
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const bool expected =
            distance(positions[i], positions[j]) <= sc.comm_range_m;
        CHECK(sets[i].count(j) == (expected ? 1u : 0u));
        CHECK(sets[i].count(j) == sets[j].count(i));
      }
    }
  }
}

TEST_CASE("the comm boundary is inclusive") {
  NetworkScenario sc;
  const std::vector<Vec3> at_boundary = {{0.0, 0.0, 0.0},
                                         {sc.comm_range_m, 0.0, 0.0}};
  auto sets = true_neighbor_sets(at_boundary, sc);
  CHECK(sets[0] == std::set<std::size_t>{1});

  const std::vector<Vec3> just_past = {{0.0, 0.0, 0.0},
                                       {sc.comm_range_m + 1e-9, 0.0, 0.0}};
  sets = true_neighbor_sets(just_past, sc);
  CHECK(sets[0].empty());
  CHECK(sets[1].empty());
}

TEST_CASE("jaccard accuracy hand cases") {
  using Set = std::set<std::size_t>;
  CHECK(neighbor_accuracy(Set{0, 1}, Set{1, 2}) == doctest::Approx(1.0 / 3.0));
  CHECK(neighbor_accuracy(Set{3, 4, 5}, Set{3, 4, 5}) == 1.0);
  CHECK(neighbor_accuracy(Set{0}, Set{1}) == 0.0);
  CHECK(neighbor_accuracy(Set{}, Set{}) == 1.0);
  CHECK(neighbor_accuracy(Set{}, Set{7}) == 0.0);
  CHECK(neighbor_accuracy(Set{7}, Set{}) == 0.0);
  // Over-reporting is penalized: one extra out of two real neighbors.
  CHECK(neighbor_accuracy(Set{1, 2, 3}, Set{1, 2}) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("jaccard accuracy is symmetric and bounded") {
  Rng rng(17);
  for (int rep = 0; rep < 200; ++rep) {
    std::set<std::size_t> a, b;
    for (int k = 0; k < 6; ++k) {
      if (rng.uniform(0.0, 1.0) < 0.5) a.insert(rng.uniform_int(0, 9));
      if (rng.uniform(0.0, 1.0) < 0.5) b.insert(rng.uniform_int(0, 9));
    }
    const double ab = neighbor_accuracy(a, b);
    CHECK(ab == neighbor_accuracy(b, a));
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0);
  }
}

TEST_CASE("recall ignores over-reporting") {
  using Set = std::set<std::size_t>;
  CHECK(neighbor_recall(Set{1, 2, 3, 4}, Set{1, 2}) == 1.0);
  CHECK(neighbor_recall(Set{1}, Set{1, 2}) == doctest::Approx(0.5));
  CHECK(neighbor_recall(Set{}, Set{}) == 1.0);
  CHECK(neighbor_recall(Set{5}, Set{}) == 1.0);
  CHECK(neighbor_recall(Set{}, Set{5}) == 0.0);
}
