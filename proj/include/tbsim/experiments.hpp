#pragma once

#include <cstdint>
#include <vector>

#include "tbsim/analysis.hpp"
#include "tbsim/montecarlo.hpp"
#include "tbsim/scenario.hpp"

namespace tbsim {

struct FringeSweep {
  double start_c = 0.0;
  double stop_c = 0.0;
  double step_c = 0.1;
};

struct FringePoint {
  double temperature_c = 0.0;
  double phase_rad = 0.0;
  double window_counts = 0.0;
  double fit_value = 0.0;
};

struct FringeRunResult {
  std::vector<FringePoint> points;
  FringeFit fit;
  double expected_visibility = 0.0;
};

/// Sweeps the idler analyzer temperature with the signal analyzer fixed at
/// its scenario setting, accumulating windowed coincidences per point. Each
/// point gets a fresh phase-setting error; pump drift accumulates on the
/// campaign clock. analytic = true evaluates the closed-form rates instead
/// of sampling.
FringeRunResult run_fringe(const ValidatedScenario& scenario,
                           const FringeSweep& sweep, double hours_per_point,
                           std::uint64_t seed, bool analytic = false,
                           bool track = true);

struct ChshRunResult {
  ChshSettings settings;
  ChshResult result;
  double expected_visibility = 0.0;
  double hours_per_setting = 0.0;
};

/// Runs the 16-setting S-value protocol (4 analyzer pairs x 4 phase
/// combinations) on one campaign clock: per-setting phase errors, pump
/// drift reset at each calibration interval, per-row E and total S with
/// combined Poisson and phase-error uncertainties.
ChshRunResult run_chsh(const ValidatedScenario& scenario, double theta_s0,
                       double theta_i0, double hours_per_setting,
                       std::uint64_t seed, bool analytic = false,
                       bool track = true);

struct CarPoint {
  double mu = 0.0;
  double car_value = 0.0;
  double matched_counts = 0.0;
  double mean_accidentals_per_slot = 0.0;
};

/// Monte Carlo replication of the source signal-to-noise measurement:
/// matched-slot window count versus the mean count over every unmatched
/// slot window inside the histogram range.
CarPoint run_car_point(const ValidatedScenario& scenario, double mu,
                       std::uint64_t seed);

/// Closed-form CAR over a mu grid at the scenario's window and arm
/// transmittances.
std::vector<CarPoint> car_curve(const ValidatedScenario& scenario,
                                const std::vector<double>& mu_grid);

}  // namespace tbsim
