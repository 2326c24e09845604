#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tbsim/units.hpp"

namespace tbsim {

/// Pair source: a pulsed pump driving spontaneous down-conversion.
/// mu is the mean number of generated photon pairs per pump pulse.
struct SourceParams {
  double mu = 0.1;
  double pulse_interval_ps = 500.0;
  double pulse_width_ps = 72.0;
  double coherence_time_ps = 1.0e7;  // 10 us pump coherence
  double pump_wavelength_nm = 775.5;
  double signal_wavelength_nm = 1547.0;
  double idler_wavelength_nm = 1555.0;
  double intrinsic_visibility = 1.0;

  double rep_rate_hz() const { return kPsPerSecond / pulse_interval_ps; }
  std::int64_t dimension() const {
    return estimate_dimension(coherence_time_ps, pulse_interval_ps);
  }
};

struct ExcessLoss {
  std::string label;
  double db = 0.0;
};

/// One transmission arm: fiber plus itemized component losses.
struct ChannelParams {
  double fiber_length_km = 0.0;
  double loss_per_km_db = 0.215;
  std::vector<ExcessLoss> excess_losses;

  double fiber_db() const { return fiber_length_km * loss_per_km_db; }
  double component_db() const;
};

/// Delay-line analyzer. The long arm delays by delay_bits pump intervals;
/// the relative phase is tuned linearly with temperature.
struct MziParams {
  int delay_bits = 2;
  double delay_time_ps = 1000.0;
  double temperature_c = 20.0;
  double reference_temperature_c = 20.0;
  double period_per_2pi_c = 0.74;
  double temperature_sigma_c = 0.01;

  double phase_at(double temperature) const {
    return phase_from_temperature(temperature, reference_temperature_c,
                                  period_per_2pi_c);
  }
  double phase() const { return phase_at(temperature_c); }
  /// Phase-setting error per analyzer implied by the temperature accuracy.
  double phase_sigma_rad() const;
};

struct DetectorParams {
  double efficiency = 0.15;
  double dark_rate_hz = 10.0;
  double jitter_sigma_ps = 21.233;  // 50 ps FWHM system response
  double dead_time_ps = 50000.0;
};

/// Start-stop interval analyzer settings. histogram_range_ps is the full
/// delay span, centered on zero.
struct TiaParams {
  double resolution_ps = 9.8;
  double window_ps = 300.0;
  double histogram_range_ps = 12000.0;
  double chunk_duration_s = 60.0;  // peak-tracking cadence
};

/// Relative arrival-time drift of the idler channel (fiber length
/// fluctuations). drift(0) = 0 for every kind.
struct DriftModel {
  enum class Kind { none, linear, random_walk };
  Kind kind = Kind::none;
  double magnitude_ps_per_hour = 250.0;
  std::uint64_t seed = 0;
};

/// Phase-setting noise and slow pump drift between calibrations.
struct PhaseNoiseModel {
  double temperature_sigma_c = 0.01;
  double period_per_2pi_c = 0.74;
  double pump_drift_rad_per_hour = 3.6e-3;
  double calibration_interval_hours = 8.0;

  double setting_sigma_rad() const;
};

struct ExperimentScenario {
  SourceParams source;
  ChannelParams channel_s;
  ChannelParams channel_i;
  // Absent analyzers model the bare start-stop configuration used for
  // source noise characterization (no interferometers in front of the
  // detectors).
  std::optional<MziParams> mzi_s;
  std::optional<MziParams> mzi_i;
  DetectorParams detector_s;
  DetectorParams detector_i;
  TiaParams tia;
  DriftModel drift;
  PhaseNoiseModel phase_noise;
  double duration_s = 3600.0;
  std::uint64_t seed = 1;

  bool analyzers_present() const {
    return mzi_s.has_value() && mzi_i.has_value();
  }
};

struct ValidationIssue {
  std::string field;
  std::string reason;
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<ValidationIssue> issues);
  const std::vector<ValidationIssue>& issues() const { return issues_; }

 private:
  std::vector<ValidationIssue> issues_;
};

/// A scenario that passed validate_scenario(). Immutable; safe to share
/// across threads.
class ValidatedScenario {
 public:
  const ExperimentScenario& get() const { return scenario_; }
  const ExperimentScenario* operator->() const { return &scenario_; }
  const ExperimentScenario& operator*() const { return scenario_; }

 private:
  friend ValidatedScenario validate_scenario(const ExperimentScenario&);
  explicit ValidatedScenario(ExperimentScenario s) : scenario_(std::move(s)) {}
  ExperimentScenario scenario_;
};

/// Checks every invariant; throws ValidationError listing each violated
/// field by path. Side-effect free and idempotent.
ValidatedScenario validate_scenario(const ExperimentScenario& s);

/// End-to-end linear transmittance times detection efficiency for one arm.
/// Component excess losses (including analyzer insertion loss) are included;
/// the analyzer's inherent 50/50 splitting is accounted for separately by
/// the rate formulas.
double arm_efficiency(const ChannelParams& channel, const DetectorParams& det);

}  // namespace tbsim
