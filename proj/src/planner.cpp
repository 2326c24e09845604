#include "tbsim/planner.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tbsim/quantum.hpp"

namespace tbsim {

namespace {

struct ArmNoise {
  double eta0;    // transmittance x efficiency at zero fiber
  double dark_w;  // dark probability per coincidence window
};

struct NoiseFloor {
  ArmNoise s;
  ArmNoise i;
  double loss_per_km;
};

NoiseFloor noise_floor(const ValidatedScenario& scenario) {
  const auto& sc = *scenario;
  NoiseFloor nf;
  nf.s.eta0 = db_to_transmittance(sc.channel_s.component_db()) *
              sc.detector_s.efficiency;
  nf.i.eta0 = db_to_transmittance(sc.channel_i.component_db()) *
              sc.detector_i.efficiency;
  nf.s.dark_w =
      dark_probability_per_window(sc.detector_s.dark_rate_hz, sc.tia.window_ps);
  nf.i.dark_w =
      dark_probability_per_window(sc.detector_i.dark_rate_hz, sc.tia.window_ps);
  nf.loss_per_km = sc.channel_s.loss_per_km_db;
  return nf;
}

// Visibility at distance, maximized over mu. With C = mu es ei / 4 and
// A = (mu es/2 + a)(mu ei/2 + b), V = v0 / (1 + 2 A/C) and A/C =
// mu/4*... reduces to mu + 2(b/ei + a/es) + 4ab/(mu es ei), minimized at
// mu* = 2 sqrt(ab/(es ei)).
double visibility_max(const NoiseFloor& nf, double total_km, double v0) {
  const double g = db_to_transmittance(nf.loss_per_km * total_km / 2.0);
  const double es = nf.s.eta0 * g;
  const double ei = nf.i.eta0 * g;
  const double a = nf.s.dark_w;
  const double b = nf.i.dark_w;
  if (a <= 0.0 && b <= 0.0) return v0;
  const double c1 = 2.0 * (b / ei + a / es);
  const double c2 = 4.0 * a * b / (es * ei);
  return v0 / (1.0 + 2.0 * c1 + 4.0 * std::sqrt(c2));
}

double car_max(const NoiseFloor& nf, double total_km) {
  const double g = db_to_transmittance(nf.loss_per_km * total_km / 2.0);
  const double es = nf.s.eta0 * g;
  const double ei = nf.i.eta0 * g;
  if (nf.s.dark_w <= 0.0 || nf.i.dark_w <= 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  const double mu_star = optimal_mu(es, ei, nf.s.dark_w, nf.i.dark_w);
  return car(mu_star, es, ei, nf.s.dark_w, nf.i.dark_w);
}

}  // namespace

double ArmBudget::component_db() const {
  double total = 0.0;
  for (const auto& item : components) total += item.db;
  return total;
}

LinkBudget build_link_budget(const ValidatedScenario& scenario) {
  const auto& s = *scenario;
  LinkBudget budget;
  budget.signal.fiber_db = s.channel_s.fiber_db();
  budget.signal.components = s.channel_s.excess_losses;
  budget.signal.detector_db = transmittance_to_db(
      s.detector_s.efficiency > 0.0 ? s.detector_s.efficiency : 1e-30);
  budget.signal.eta = arm_efficiency(s.channel_s, s.detector_s);
  budget.idler.fiber_db = s.channel_i.fiber_db();
  budget.idler.components = s.channel_i.excess_losses;
  budget.idler.detector_db = transmittance_to_db(
      s.detector_i.efficiency > 0.0 ? s.detector_i.efficiency : 1e-30);
  budget.idler.eta = arm_efficiency(s.channel_i, s.detector_i);
  return budget;
}

double CampaignPlan::duration_hours() const {
  return chsh_duration_hours(rate_max_per_hour, counts_per_setting,
                             n_settings) +
         calibration_overhead_hours;
}

double rate_at_distance(double base_rate_per_hour, double base_km, double km,
                        double loss_per_km_db) {
  if (km < 0.0) {
    throw std::invalid_argument("rate_at_distance: distance must be >= 0");
  }
  return base_rate_per_hour *
         std::pow(10.0, -loss_per_km_db * (km - base_km) / 10.0);
}

double chsh_duration_hours(double rate_per_hour, double counts_per_setting,
                           int n_settings) {
  if (rate_per_hour < 0.0 || counts_per_setting < 0.0 || n_settings < 0) {
    throw std::invalid_argument("chsh_duration: inputs must be >= 0");
  }
  if (rate_per_hour == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return n_settings * counts_per_setting / rate_per_hour;
}

double best_visibility_at(const ValidatedScenario& scenario,
                          double total_km) {
  return visibility_max(noise_floor(scenario), total_km,
                        scenario->source.intrinsic_visibility);
}

double best_car_at(const ValidatedScenario& scenario, double total_km) {
  return car_max(noise_floor(scenario), total_km);
}

double max_distance_km(const ValidatedScenario& scenario,
                       const DistanceCriterion& criterion) {
  const NoiseFloor nf = noise_floor(scenario);
  if (nf.s.dark_w <= 0.0 && nf.i.dark_w <= 0.0) {
    return std::numeric_limits<double>::infinity();  // no noise floor
  }
  const double v0 = scenario->source.intrinsic_visibility;
  auto metric = [&](double km) {
    return criterion.kind == DistanceCriterion::Kind::visibility
               ? visibility_max(nf, km, v0)
               : car_max(nf, km);
  };
  if (metric(0.0) < criterion.threshold) {
    throw std::domain_error(
        "max_distance: criterion is not met even at zero distance");
  }
  double lo = 0.0;
  double hi = 100.0;
  while (metric(hi) >= criterion.threshold && hi < 1e7) hi *= 2.0;
  if (hi >= 1e7) return std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < 200 && hi - lo > 1e-3; ++iter) {
    const double mid = (lo + hi) / 2.0;
    if (metric(mid) >= criterion.threshold) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

}  // namespace tbsim
