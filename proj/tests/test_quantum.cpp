#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <random>

#include "tbsim/quantum.hpp"
#include "tbsim/scenario_json.hpp"

using namespace tbsim;

namespace {

// Independent oracle: expand the analyzer-transformed product state term by
// term and collect |amplitude|^2 per (signal_slot, idler_slot). Kept free of
// any closed-form shortcuts so it can cross-check the implementation.
std::map<std::pair<std::int64_t, std::int64_t>, double> brute_force_weights(
    std::int64_t dimension, int n, double theta_s, double theta_i) {
  using cd = std::complex<double>;
  std::map<std::pair<std::int64_t, std::int64_t>, cd> amps;
  const cd es = std::exp(cd(0.0, theta_s));
  const cd ei = std::exp(cd(0.0, theta_i));
  for (std::int64_t k = 1; k <= dimension; ++k) {
    amps[{k, k}] += cd(1.0, 0.0);
    amps[{k, k + n}] += ei;
    amps[{k + n, k}] += es;
    amps[{k + n, k + n}] += es * ei;
  }
  std::map<std::pair<std::int64_t, std::int64_t>, double> weights;
  for (const auto& [slots, amp] : amps) {
    weights[slots] = std::norm(amp);
  }
  return weights;
}

}  // namespace

TEST_CASE("joint distribution matches brute-force enumeration") {
  const double pi = std::numbers::pi;
  for (std::int64_t dim = 2; dim <= 6; ++dim) {
    for (int n = 1; n < dim; ++n) {
      for (int p = 0; p < 8; ++p) {
        const double sum = 2.0 * pi * p / 8.0;
        const double theta_s = 0.3 * p;  // split arbitrarily between arms
        const double theta_i = sum - theta_s;
        const auto dist =
            joint_slot_distribution(dim, n, theta_s, theta_i);
        const auto oracle = brute_force_weights(dim, n, theta_s, theta_i);
        CHECK(dist.weights.size() == oracle.size());
        for (const auto& [slots, w] : oracle) {
          CHECK(std::abs(dist.weight(slots.first, slots.second) - w) <=
                1e-12);
        }
      }
    }
  }
}

TEST_CASE("joint distribution closed-form structure at large N") {
  const auto dist = joint_slot_distribution(20000, 2, 0.0, 0.0);
  CHECK(dist.diagonal_weight(1) == doctest::Approx(1.0));
  CHECK(dist.diagonal_weight(2) == doctest::Approx(1.0));
  CHECK(dist.diagonal_weight(3) == doctest::Approx(4.0));
  CHECK(dist.diagonal_weight(20000) == doctest::Approx(4.0));
  CHECK(dist.diagonal_weight(20001) == doctest::Approx(1.0));
  CHECK(dist.diagonal_weight(20002) == doctest::Approx(1.0));
  CHECK(dist.interfering_fraction() ==
        doctest::Approx((20000.0 - 2.0) / 20000.0));
}

TEST_CASE("destructive phase sum kills interfering terms") {
  const auto dist = joint_slot_distribution(100, 2, std::numbers::pi, 0.0);
  for (std::int64_t k = 3; k <= 100; ++k) {
    CHECK(std::abs(dist.diagonal_weight(k)) <= 1e-12);
  }
  // only the 2n boundary diagonal terms survive
  CHECK(dist.diagonal_weight(1) == doctest::Approx(1.0));
  CHECK(dist.diagonal_weight(2) == doctest::Approx(1.0));
  CHECK(dist.diagonal_weight(101) == doctest::Approx(1.0));
  CHECK(dist.diagonal_weight(102) == doctest::Approx(1.0));
}

TEST_CASE("small case N=3 n=1 at quarter phase") {
  const auto dist =
      joint_slot_distribution(3, 1, std::numbers::pi / 4.0,
                              std::numbers::pi / 4.0);
  CHECK(dist.diagonal_weight(1) == doctest::Approx(1.0));
  CHECK(dist.diagonal_weight(2) == doctest::Approx(2.0));  // |1+i|^2
  CHECK(dist.diagonal_weight(3) == doctest::Approx(2.0));
  CHECK(dist.diagonal_weight(4) == doctest::Approx(1.0));
}

TEST_CASE("distribution depends only on the phase sum") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-6.0, 6.0);
  for (int i = 0; i < 50; ++i) {
    const double ts = uni(rng);
    const double ti = uni(rng);
    const double delta = uni(rng);
    const auto a = joint_slot_distribution(8, 2, ts, ti);
    const auto b = joint_slot_distribution(8, 2, ts + delta, ti - delta);
    for (const auto& [slots, w] : a.weights) {
      CHECK(std::abs(b.weight(slots.first, slots.second) - w) <= 1e-12);
    }
  }
}

TEST_CASE("rejects invalid delay") {
  CHECK_THROWS_AS(joint_slot_distribution(4, 4, 0.0, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(joint_slot_distribution(4, 0, 0.0, 0.0),
                  std::invalid_argument);
}

TEST_CASE("single-photon marginals are phase independent") {
  const auto ref = joint_slot_distribution(6, 2, 0.0, 0.0);
  const auto ref_s = ref.signal_marginal();
  const auto ref_i = ref.idler_marginal();
  for (int p = 0; p < 8; ++p) {
    const double sum = 2.0 * std::numbers::pi * p / 8.0;
    const auto dist = joint_slot_distribution(6, 2, sum * 0.37,
                                              sum * 0.63);
    const auto ms = dist.signal_marginal();
    const auto mi = dist.idler_marginal();
    REQUIRE(ms.size() == ref_s.size());
    for (std::size_t k = 0; k < ms.size(); ++k) {
      CHECK(ms[k] == doctest::Approx(ref_s[k]));
      CHECK(mi[k] == doctest::Approx(ref_i[k]));
    }
  }
  // bulk slots carry both paths, boundary slots one
  CHECK(ref_s.front() == doctest::Approx(1.0));
  CHECK(ref_s[3] == doctest::Approx(2.0));
  CHECK(ref_s.back() == doctest::Approx(1.0));
}

TEST_CASE("franson peak weights") {
  const auto w0 = franson_peak_weights(0.0);
  CHECK(w0.central == doctest::Approx(0.25));
  CHECK(w0.side == doctest::Approx(1.0 / 16.0));
  const auto wpi = franson_peak_weights(std::numbers::pi);
  CHECK(wpi.central == doctest::Approx(0.0));
  // central:side ratio at constructive phase is 4:1
  CHECK(w0.central / w0.side == doctest::Approx(4.0));
}

TEST_CASE("coincidence rate reproduces the fringe law") {
  RateModel m;
  m.rep_rate_hz = 2e9;
  m.mu = 1e-4;
  m.eta_s = 0.1;
  m.eta_i = 0.1;
  m.v0 = 1.0;

  SUBCASE("destructive limit with no noise") {
    // at theta_sum = pi the interference term cancels; what is left is the
    // O(mu^2) accidental floor, which vanishes as mu -> 0
    RateModel clean = m;
    double prev = 1.0;
    for (double mu : {1e-6, 1e-8, 1e-10, 1e-12}) {
      clean.mu = mu;
      const double r =
          coincidence_rate_hz(std::numbers::pi, 0.0, clean, 300.0);
      CHECK(r <= expected_accidentals_hz(clean, 300.0) * (1.0 + 1e-9) +
                 1e-12 * clean.ceiling_hz());
      CHECK(r < prev);
      prev = r;
    }
    CHECK(prev <= 1e-15);
  }

  SUBCASE("max over phases equals the ceiling plus accidentals") {
    const double r0 = coincidence_rate_hz(0.0, 0.0, m, 300.0);
    CHECK(r0 == doctest::Approx(m.ceiling_hz() +
                                expected_accidentals_hz(m, 300.0)));
  }

  SUBCASE("fringe ratio equals (1+V)/(1-V)") {
    const double v = expected_visibility(m, 300.0);
    const double rmax = coincidence_rate_hz(0.0, 0.0, m, 300.0);
    const double rmin =
        coincidence_rate_hz(std::numbers::pi, 0.0, m, 300.0);
    CHECK(rmax / rmin == doctest::Approx((1.0 + v) / (1.0 - v)).epsilon(1e-9));
  }
}

TEST_CASE("long-haul scenario analytic rate is about 100 per hour") {
  const auto scn = validate_scenario(paper_300km_scenario());
  const auto m = make_rate_model(scn);
  const double per_hour =
      coincidence_rate_hz(0.0, 0.0, m, scn->tia.window_ps) * 3600.0;
  CHECK(per_hour > 90.0);
  CHECK(per_hour < 112.0);
}

TEST_CASE("expected accidentals") {
  RateModel m;
  m.rep_rate_hz = 1e9;
  m.mu = 0.0;
  m.eta_s = 0.5;
  m.eta_i = 0.5;
  m.dark_s_hz = 0.0;
  m.dark_i_hz = 0.0;
  CHECK(expected_accidentals_hz(m, 600.0) == 0.0);

  // source-noise conditions: 1 GHz, 600 ps window, mu = 3e-7, bare arms
  const auto scn = validate_scenario(source_noise_scenario());
  auto m4 = make_rate_model(scn);
  CHECK_FALSE(m4.analyzers);
  const double acc_hz = expected_accidentals_hz(m4, 600.0);
  // events expected over 1.5 h in 4000 unmatched slots
  const double per_slot = acc_hz / m4.rep_rate_hz;
  const double events = per_slot * 1e9 * 5400.0 * 4000.0;
  CHECK(events > 7.0);    // observed 21, reconstruction tolerance x3
  CHECK(events < 63.0);
}

TEST_CASE("expected visibility") {
  RateModel m;
  m.rep_rate_hz = 2e9;
  m.eta_s = 0.1;
  m.eta_i = 0.1;
  m.v0 = 1.0;

  SUBCASE("single-pair limit") {
    m.mu = 1e-9;
    CHECK(expected_visibility(m, 300.0) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("multi-pair penalty 1/(1+2mu)") {
    m.mu = 0.1;
    CHECK(expected_visibility(m, 300.0) ==
          doctest::Approx(1.0 / 1.2).epsilon(1e-9));
  }
  SUBCASE("long-haul scenario lands in the measured bands") {
    const auto scn = validate_scenario(paper_300km_scenario());
    const auto mm = make_rate_model(scn);
    const double v = expected_visibility(mm, scn->tia.window_ps);
    CHECK(v > 0.78);
    CHECK(v < 0.86);
  }
  SUBCASE("monotone non-increasing in mu and darks") {
    double prev = 2.0;
    for (double mu : {1e-4, 1e-3, 1e-2, 0.1, 0.3}) {
      m.mu = mu;
      m.dark_s_hz = 0.0;
      m.dark_i_hz = 0.0;
      const double v = expected_visibility(m, 300.0);
      CHECK(v <= prev);
      prev = v;
    }
    m.mu = 0.01;
    prev = 2.0;
    for (double dark : {0.0, 10.0, 100.0, 1e4, 1e6}) {
      m.dark_s_hz = dark;
      m.dark_i_hz = 1.5 * dark;
      const double v = expected_visibility(m, 300.0);
      CHECK(v <= prev);
      prev = v;
    }
  }
}

TEST_CASE("car formula") {
  SUBCASE("dark-free identity 1 + 1/mu") {
    CHECK(car(1e-3, 0.5, 0.5, 0.0, 0.0) == doctest::Approx(1001.0));
    for (double mu : {1e-6, 1e-3, 0.1, 1.0, 10.0, 1e4}) {
      CHECK(car(mu, 0.3, 0.7, 0.0, 0.0) ==
            doctest::Approx(1.0 + 1.0 / mu).epsilon(1e-12));
    }
  }
  SUBCASE("reconstructed source-noise point") {
    const double v = car(3e-7, 0.06, 0.08, 6e-9, 9e-9);
    CHECK(v == doctest::Approx(1.818183e6).epsilon(1e-3));
  }
  SUBCASE("large-mu asymptote approaches one from above") {
    // the accidental product grows one power of mu faster than the true
    // coincidences, so the ratio decays to 1 as 1 + 1/mu
    double prev = car(1.0, 0.06, 0.08, 6e-9, 9e-9);
    for (double mu : {10.0, 100.0, 1e4, 1e6}) {
      const double v = car(mu, 0.06, 0.08, 6e-9, 9e-9);
      CHECK(v < prev);
      CHECK(v > 1.0);
      CHECK(v == doctest::Approx(1.0 + 1.0 / mu).epsilon(1e-2));
      prev = v;
    }
  }
  SUBCASE("undefined when the accidental floor vanishes") {
    CHECK_THROWS_AS(car(0.0, 0.5, 0.5, 0.0, 1e-9), std::domain_error);
  }
}

TEST_CASE("optimal mu") {
  SUBCASE("symmetric case") {
    CHECK(optimal_mu(1.0, 1.0, 1e-8, 1e-8) == doctest::Approx(1e-8));
  }
  SUBCASE("reconstruction point") {
    CHECK(optimal_mu(0.06, 0.08, 6e-9, 9e-9) ==
          doctest::Approx(1.0607e-7).epsilon(1e-3));
  }
  SUBCASE("square-root scaling in the dark rates") {
    const double base = optimal_mu(0.06, 0.08, 6e-9, 9e-9);
    // one dark rate up 100x moves the optimum by sqrt(100)
    CHECK(optimal_mu(0.06, 0.08, 6e-7, 9e-9) ==
          doctest::Approx(10.0 * base).epsilon(1e-9));
    CHECK(optimal_mu(0.06, 0.08, 6e-8, 9e-8) ==
          doctest::Approx(10.0 * base).epsilon(1e-9));
  }
  SUBCASE("maximizes car across random draws") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
      const double as = 0.01 + uni(rng);
      const double ai = 0.01 + uni(rng);
      const double ds = 1e-10 * std::pow(10.0, 3.0 * uni(rng));
      const double di = 1e-10 * std::pow(10.0, 3.0 * uni(rng));
      const double mu_star = optimal_mu(as, ai, ds, di);
      const double best = car(mu_star, as, ai, ds, di);
      CHECK(car(mu_star * 1.1, as, ai, ds, di) < best);
      CHECK(car(mu_star * 0.9, as, ai, ds, di) < best);
    }
  }
  SUBCASE("numeric maximization cross-check") {
    const double as = 0.06, ai = 0.08, ds = 6e-9, di = 9e-9;
    double best_mu = 0.0, best = 0.0;
    for (double mu = 1e-9; mu < 1e-4; mu *= 1.001) {
      const double v = car(mu, as, ai, ds, di);
      if (v > best) {
        best = v;
        best_mu = mu;
      }
    }
    CHECK(optimal_mu(as, ai, ds, di) ==
          doctest::Approx(best_mu).epsilon(2e-3));
  }
}
