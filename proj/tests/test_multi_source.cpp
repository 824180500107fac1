#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "aoi/multi_source.hpp"
#include "aoi/rng.hpp"

using namespace aoi;

namespace {

PenaltyCurve identity_penalty(int delta_max) {
  std::vector<double> v;
  for (int d = 0; d <= delta_max; ++d) v.push_back(d);
  return PenaltyCurve(std::move(v));
}

PenaltyCurve dip_penalty(int dip, int delta_max) {
  std::vector<double> v;
  for (int d = 0; d <= delta_max; ++d) {
    double x = static_cast<double>(d - dip) / dip;
    v.push_back(0.2 + 3.0 * x * x);
  }
  return PenaltyCurve(std::move(v));
}

// inference-error-scale curve: strictly increasing, bounded by ~6
PenaltyCurve random_increasing(Rng& rng, int delta_max) {
  std::vector<double> v;
  double acc = rng.next_double() * 0.5;
  for (int d = 0; d <= delta_max; ++d) {
    acc += 0.01 + 0.07 * rng.next_double();
    v.push_back(acc);
  }
  return PenaltyCurve(std::move(v));
}

}  // namespace

TEST_CASE("whittle waiting time") {
  SUBCASE("strictly increasing penalty, unit service: z = max(delta - b - 1, 0)") {
    // interior states only: at delta >= delta_max the index is flat, so the
    // wait stops at the plateau edge (the skipped slots cost exactly the
    // index there, leaving the Whittle value unchanged)
    Rng rng(301);
    for (int trial = 0; trial < 5; ++trial) {
      PenaltyCurve p = random_increasing(rng, 40);
      for (int b : {0, 2}) {
        Arm arm(0, b, 1.0, p, service_constant(1));
        for (int delta = 0; delta < 40; ++delta)
          CHECK(whittle_waiting_time(arm, 1, delta) == std::max(delta - b - 1, 0));
      }
    }
  }
  SUBCASE("index at delivery already adequate: zero wait") {
    Arm arm(0, 0, 1.0, identity_penalty(32), service_constant(2));
    CHECK(whittle_waiting_time(arm, 2, 0) == 0);
    CHECK(whittle_waiting_time(arm, 2, 1) == 0);
  }
  SUBCASE("dip penalty jumps past the dip") {
    PenaltyCurve p = dip_penalty(10, 40);
    Arm arm(0, 0, 1.0, p, service_constant(1));
    // target a state whose index sits on the rising branch well past the dip
    long long target = 25;
    double target_gamma = arm.gittins.value(target);
    REQUIRE(target_gamma > arm.gittins.value(1));
    int z = whittle_waiting_time(arm, 1, target);
    CHECK(z > 1);
    CHECK(arm.gittins.value(1 + z) >= target_gamma);
    CHECK(arm.gittins.value(z) < target_gamma);
  }
}

TEST_CASE("whittle index closed forms") {
  SUBCASE("constant penalty: never worth a positive charge") {
    PenaltyCurve p(std::vector<double>(16, 2.5));
    Arm arm(0, 0, 1.5, p, service_geometric(0.5, 12));
    for (int d = 0; d <= 14; ++d) CHECK(whittle_index(arm, d) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("identity penalty, unit service") {
    Arm arm(0, 0, 1.0, identity_penalty(64), service_constant(1));
    CHECK(whittle_index(arm, 3) == doctest::Approx(6.0).epsilon(1e-13));
    CHECK(whittle_index(arm, 1) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("whittle special case") {
  PenaltyCurve p = identity_penalty(64);
  CHECK(whittle_special_case(1.0, p, 3) == doctest::Approx(6.0).epsilon(1e-13));
  CHECK(whittle_special_case(2.0, p, 3) == doctest::Approx(12.0).epsilon(1e-13));
  PenaltyCurve c(std::vector<double>(12, 3.0));
  for (int d = 1; d <= 10; ++d) CHECK(whittle_special_case(1.0, c, d) == doctest::Approx(0.0).epsilon(1e-13));

  // misuse
  CHECK_THROWS_AS(whittle_special_case(1.0, dip_penalty(4, 16), 2), input_error);
  CHECK_THROWS_AS(whittle_special_case(1.0, p, 0), input_error);
}

TEST_CASE("general formula recovers the closed form on its domain") {
  Rng rng(307);
  for (int trial = 0; trial < 10; ++trial) {
    PenaltyCurve p = random_increasing(rng, 64);
    double w = 0.5 + rng.next_double() * 3.0;
    Arm arm(0, 0, w, p, service_constant(1));
    for (int delta = 1; delta <= 64; ++delta)
      CHECK(std::abs(whittle_index(arm, delta) - whittle_special_case(w, p, delta)) <= 1e-12);
  }
}

TEST_CASE("whittle index is linear in the weight") {
  PenaltyCurve p = dip_penalty(8, 32);
  auto s = service_geometric(0.5, 10);
  Arm a1(0, 1, 1.0, p, s);
  Arm a3(0, 1, 3.0, p, s);
  for (int d = 0; d <= 32; ++d)
    CHECK(whittle_index(a3, d) == doctest::Approx(3.0 * whittle_index(a1, d)).epsilon(1e-10));
}

TEST_CASE("whittle table clamps past the penalty plateau") {
  Arm arm(0, 0, 1.0, dip_penalty(6, 24), service_constant(1));
  WhittleTable table = whittle_table(arm);
  CHECK(table.value(24) == table.value(500));
  CHECK(table.value(3) == doctest::Approx(whittle_index(arm, 3)).epsilon(1e-12));
}

TEST_CASE("indexability diagnostic") {
  std::vector<double> grid;
  for (int i = 0; i <= 50; ++i) grid.push_back(0.1 * i);

  SUBCASE("lambda = 0 recovers the single-source threshold root") {
    PenaltyCurve p = dip_penalty(8, 32);
    auto s = service_geometric(0.5, 12);
    Arm arm(0, 0, 1.0, p, s);
    auto report = indexability_diagnostic(arm, {0.0});
    CHECK(report.points[0].beta_bar == doctest::Approx(threshold_root(p, s, 0)).epsilon(1e-9));
  }
  SUBCASE("beta_bar strictly increasing and passive sets nested") {
    Rng rng(311);
    for (int trial = 0; trial < 3; ++trial) {
      PenaltyCurve p = trial == 0 ? identity_penalty(40) : dip_penalty(6 + 4 * trial, 40);
      for (const auto& s : {service_constant(1), service_geometric(0.5, 10)}) {
        Arm arm(0, trial % 2, 1.0 + trial, p, s);
        auto report = indexability_diagnostic(arm, grid);
        CHECK(report.strictly_increasing);
        CHECK(report.nested);
        for (const auto& pt : report.points) CHECK_FALSE(pt.saturated);
      }
    }
  }
  SUBCASE("unsorted grid is rejected") {
    Arm arm(0, 0, 1.0, identity_penalty(16), service_constant(1));
    CHECK_THROWS_AS(indexability_diagnostic(arm, {1.0, 0.5}), input_error);
  }
}

TEST_CASE("algorithm 1 decision rule") {
  SUBCASE("negative indices keep every source silent") {
    std::vector<ArmState> arms{{0, 0, -0.5}, {1, 0, -0.1}};
    CHECK_FALSE(whittle_decide(arms, true).has_value());
  }
  SUBCASE("busy channel schedules nothing") {
    std::vector<ArmState> arms{{0, 0, 5.0}};
    CHECK_FALSE(whittle_decide(arms, false).has_value());
  }
  SUBCASE("argmax with deterministic tie-breaking") {
    std::vector<ArmState> arms{{0, 1, 2.0}, {0, 0, 2.0}, {1, 0, 2.0}, {1, 1, 1.0}};
    auto d = whittle_decide(arms, true);
    REQUIRE(d.has_value());
    CHECK(d->source == 0);
    CHECK(d->offset == 0);
  }
  SUBCASE("two symmetric sources, identity penalty: oldest source wins (MAF)") {
    PenaltyCurve p = identity_penalty(64);
    auto s = service_constant(1);
    Arm arm0(0, 0, 1.0, p, s), arm1(1, 0, 1.0, p, s);
    std::vector<ArmState> arms{{0, 0, whittle_index(arm0, 3)}, {1, 0, whittle_index(arm1, 1)}};
    auto d = whittle_decide(arms, true);
    REQUIRE(d.has_value());
    CHECK(d->source == 0);
  }
  SUBCASE("whittle argmax reduces to max-age-first for identical monotone arms") {
    PenaltyCurve p = identity_penalty(64);
    auto s = service_constant(1);
    WhittleTable table(Arm(0, 0, 1.0, p, s), 64);
    Rng rng(313);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<long long> ages{1 + static_cast<long long>(rng.next_double() * 40),
                                  1 + static_cast<long long>(rng.next_double() * 40),
                                  1 + static_cast<long long>(rng.next_double() * 40)};
      std::vector<ArmState> arms;
      for (int l = 0; l < 3; ++l) arms.push_back({l, 0, table.value(ages[static_cast<std::size_t>(l)])});
      auto d = whittle_decide(arms, true);
      REQUIRE(d.has_value());
      long long best_age = *std::max_element(ages.begin(), ages.end());
      CHECK(ages[static_cast<std::size_t>(d->source)] == best_age);
    }
  }
}
