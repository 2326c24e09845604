#pragma once

#include <string>
#include <vector>

#include "tbsim/scenario.hpp"

namespace tbsim {

/// Itemized loss budget for one arm. The detector efficiency is carried as
/// an equivalent dB entry in the full total; eta is the end-to-end linear
/// transmittance including the detector.
struct ArmBudget {
  double fiber_db = 0.0;
  std::vector<ExcessLoss> components;
  double detector_db = 0.0;
  double eta = 1.0;

  double component_db() const;
  double total_db() const { return fiber_db + component_db() + detector_db; }
};

struct LinkBudget {
  ArmBudget signal;
  ArmBudget idler;

  /// Fiber-only loss over both arms (the quantum channel proper).
  double quantum_channel_db() const {
    return signal.fiber_db + idler.fiber_db;
  }
  double full_db() const { return signal.total_db() + idler.total_db(); }
};

LinkBudget build_link_budget(const ValidatedScenario& scenario);

struct CampaignPlan {
  double rate_max_per_hour = 0.0;  // coincidences/hour at constructive phases
  double counts_per_setting = 100.0;
  int n_settings = 16;
  double calibration_overhead_hours = 0.0;

  double duration_hours() const;
};

/// Coincidence rate rescaled from a baseline at base_km total fiber to a
/// new total distance: rate * 10^(-loss_per_km (km - base_km) / 10).
double rate_at_distance(double base_rate_per_hour, double base_km, double km,
                        double loss_per_km_db);

/// Nominal per-km loss used for distance projections.
inline constexpr double kNominalFiberLossDbPerKm = 0.2;

/// Hours needed to accumulate counts_per_setting at each of n_settings
/// analyzer settings. Returns infinity for a zero rate.
double chsh_duration_hours(double rate_per_hour, double counts_per_setting,
                           int n_settings);

struct DistanceCriterion {
  enum class Kind { visibility, car };
  Kind kind = Kind::visibility;
  double threshold = 0.71;
};

/// Best achievable two-photon visibility at the given total fiber distance,
/// maximized over the pair rate mu. Darks enter as per-window probabilities
/// at the scenario's coincidence window.
double best_visibility_at(const ValidatedScenario& scenario, double total_km);

/// Best achievable coincidence-to-accidental ratio at the given distance,
/// maximized over mu.
double best_car_at(const ValidatedScenario& scenario, double total_km);

/// Largest total distance at which the criterion is still met, maximizing
/// over mu at every distance. Returns infinity when both arms are dark-free
/// (no noise floor). Throws when the criterion already fails at zero fiber.
double max_distance_km(const ValidatedScenario& scenario,
                       const DistanceCriterion& criterion);

}  // namespace tbsim
