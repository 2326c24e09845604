#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "tbsim/planner.hpp"
#include "tbsim/quantum.hpp"
#include "tbsim/scenario_json.hpp"

using namespace tbsim;

TEST_CASE("link budget itemization") {
  const auto scn = validate_scenario(paper_300km_scenario());
  const auto budget = build_link_budget(scn);

  // quantum channel only: 150 km per arm at 0.215 dB/km
  CHECK(budget.signal.fiber_db == doctest::Approx(32.25));
  CHECK(budget.quantum_channel_db() == doctest::Approx(64.5));
  CHECK(budget.quantum_channel_db() > 64.0);

  // detector efficiencies as dB equivalents
  CHECK(budget.signal.detector_db ==
        doctest::Approx(8.2391).epsilon(1e-3));
  CHECK(budget.idler.detector_db == doctest::Approx(6.9897).epsilon(1e-4));

  // eta matches the quantum module's arm efficiency
  const auto m = make_rate_model(scn);
  CHECK(budget.signal.eta == doctest::Approx(m.eta_s).epsilon(1e-12));
  CHECK(budget.idler.eta == doctest::Approx(m.eta_i).epsilon(1e-12));
}

TEST_CASE("bare-arm budget reduces to the component losses") {
  auto s = source_noise_scenario();
  const auto budget = build_link_budget(validate_scenario(s));
  CHECK(budget.quantum_channel_db() == doctest::Approx(0.0));
  // wdm 0.61 + pump filter 0.19 on the idler arm, detector 6.99 dB
  double wdm = 0.0, filter = 0.0;
  for (const auto& item : budget.idler.components) {
    if (item.label == "wdm_filter") wdm = item.db;
    if (item.label == "pump_reject_filter") filter = item.db;
  }
  CHECK(wdm + filter == doctest::Approx(0.80));
  CHECK(budget.idler.detector_db == doctest::Approx(6.9897).epsilon(1e-4));
}

TEST_CASE("ideal arm has unit transmittance") {
  auto s = paper_300km_scenario();
  s.channel_s.fiber_length_km = 0.0;
  s.channel_s.excess_losses.clear();
  s.detector_s.efficiency = 1.0;
  const auto budget = build_link_budget(validate_scenario(s));
  CHECK(budget.signal.eta == doctest::Approx(1.0));
  CHECK(budget.signal.total_db() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("rate_at_distance scaling") {
  CHECK(rate_at_distance(100.0, 300.0, 300.0, 0.21) ==
        doctest::Approx(100.0));
  CHECK(rate_at_distance(100.0, 300.0, 400.0, 0.21) ==
        doctest::Approx(0.7943).epsilon(1e-3));
  CHECK(rate_at_distance(100.0, 300.0, 480.0, 0.21) ==
        doctest::Approx(0.0166).epsilon(1e-2));
  CHECK(rate_at_distance(100.0, 300.0, 400.0, kNominalFiberLossDbPerKm) ==
        doctest::Approx(1.0));
  CHECK_THROWS_AS(rate_at_distance(100.0, 300.0, -1.0, 0.2),
                  std::invalid_argument);
}

TEST_CASE("rate_at_distance is log-linear in distance") {
  const double loss = 0.21;
  double prev = rate_at_distance(100.0, 300.0, 300.0, loss);
  for (double km = 320.0; km <= 600.0; km += 20.0) {
    const double r = rate_at_distance(100.0, 300.0, km, loss);
    CHECK(r < prev);
    CHECK(std::log10(prev / r) == doctest::Approx(loss * 20.0 / 10.0));
    prev = r;
  }
}

TEST_CASE("chsh duration") {
  CHECK(chsh_duration_hours(1.0, 100.0, 16) == doctest::Approx(1600.0));
  CHECK(chsh_duration_hours(1.0, 100.0, 16) / kHoursPerDay ==
        doctest::Approx(66.67).epsilon(1e-3));
  CHECK(chsh_duration_hours(100.0, 100.0, 16) == doctest::Approx(16.0));
  CHECK(chsh_duration_hours(0.0, 100.0, 16) ==
        std::numeric_limits<double>::infinity());
  // duration scales inversely with rate
  for (double rate : {0.5, 2.0, 8.0, 64.0}) {
    CHECK(chsh_duration_hours(rate, 100.0, 16) * rate ==
          doctest::Approx(1600.0));
  }
}

TEST_CASE("detector upgrade shortens the campaign") {
  // 400 km at ~1/h; both detectors to 90% efficiency: x27 rate
  const double upgraded = 1.0 * (0.9 / 0.15) * (0.9 / 0.20);
  CHECK(upgraded == doctest::Approx(27.0));
  const double days =
      chsh_duration_hours(upgraded, 100.0, 16) / kHoursPerDay;
  CHECK(days == doctest::Approx(2.469).epsilon(1e-3));
  CHECK(days <= 4.0);
}

TEST_CASE("max distance under a visibility criterion") {
  const auto scn = validate_scenario(paper_300km_scenario());
  DistanceCriterion crit;
  crit.kind = DistanceCriterion::Kind::visibility;
  crit.threshold = 0.71;  // S > 2 under the fringe law
  const double km = max_distance_km(scn, crit);
  CHECK(km > 420.0);
  CHECK(km < 540.0);
  // tightening the criterion shrinks the distance
  crit.threshold = 0.85;
  const double km_tight = max_distance_km(scn, crit);
  CHECK(km_tight < km);
  crit.threshold = 0.95;
  CHECK(max_distance_km(scn, crit) < km_tight);
}

TEST_CASE("max distance responds to dark rate") {
  auto s = paper_300km_scenario();
  const DistanceCriterion crit{DistanceCriterion::Kind::visibility, 0.71};
  const double base = max_distance_km(validate_scenario(s), crit);
  s.detector_s.dark_rate_hz *= 10.0;
  s.detector_i.dark_rate_hz *= 10.0;
  const double noisy = max_distance_km(validate_scenario(s), crit);
  CHECK(noisy < base);
}

TEST_CASE("dark-free link is unbounded") {
  auto s = paper_300km_scenario();
  s.detector_s.dark_rate_hz = 0.0;
  s.detector_i.dark_rate_hz = 0.0;
  const DistanceCriterion crit{DistanceCriterion::Kind::visibility, 0.71};
  CHECK(max_distance_km(validate_scenario(s), crit) ==
        std::numeric_limits<double>::infinity());
}

TEST_CASE("unreachable criterion is an error") {
  // with mu free, visibility at zero distance approaches the intrinsic
  // value, so only thresholds above v0 are unreachable
  auto s = paper_300km_scenario();
  s.source.intrinsic_visibility = 0.9;
  const auto scn = validate_scenario(s);
  const DistanceCriterion crit{DistanceCriterion::Kind::visibility, 0.95};
  CHECK_THROWS_AS(max_distance_km(scn, crit), std::domain_error);
}

TEST_CASE("max distance under a CAR criterion") {
  const auto scn = validate_scenario(paper_300km_scenario());
  DistanceCriterion crit;
  crit.kind = DistanceCriterion::Kind::car;
  crit.threshold = 10.0;
  const double km = max_distance_km(scn, crit);
  CHECK(km > 300.0);
  crit.threshold = 100.0;
  CHECK(max_distance_km(scn, crit) < km);
  // the best CAR at the solved distance indeed meets the threshold
  CHECK(best_car_at(scn, km - 1.0) >= 100.0 * 0.0 + 10.0);
}

TEST_CASE("campaign plan duration identity") {
  CampaignPlan plan;
  plan.rate_max_per_hour = 100.0;
  plan.counts_per_setting = 100.0;
  plan.n_settings = 16;
  plan.calibration_overhead_hours = 2.0;
  CHECK(plan.duration_hours() == doctest::Approx(18.0));
}
