#include "tbsim/scenario.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace tbsim {

namespace {

std::string format_issues(const std::vector<ValidationIssue>& issues) {
  std::ostringstream os;
  os << "scenario validation failed:";
  for (const auto& issue : issues) {
    os << "\n  " << issue.field << ": " << issue.reason;
  }
  return os.str();
}

class IssueCollector {
 public:
  void require(bool ok, const std::string& field, const std::string& reason) {
    if (!ok) issues_.push_back({field, reason});
  }
  std::vector<ValidationIssue> take() { return std::move(issues_); }
  bool empty() const { return issues_.empty(); }

 private:
  std::vector<ValidationIssue> issues_;
};

void check_channel(IssueCollector& c, const ChannelParams& ch,
                   const std::string& path) {
  c.require(ch.fiber_length_km >= 0.0, path + ".fiber_length_km",
            "must be >= 0");
  c.require(ch.loss_per_km_db >= 0.0, path + ".loss_per_km_db",
            "must be >= 0");
  for (std::size_t i = 0; i < ch.excess_losses.size(); ++i) {
    c.require(ch.excess_losses[i].db >= 0.0,
              path + ".excess_losses[" + std::to_string(i) + "]",
              "loss must be >= 0 dB");
  }
}

void check_detector(IssueCollector& c, const DetectorParams& d,
                    const std::string& path) {
  c.require(d.efficiency >= 0.0 && d.efficiency <= 1.0, path + ".efficiency",
            "must be in [0,1]");
  c.require(d.dark_rate_hz >= 0.0, path + ".dark_rate_hz", "must be >= 0");
  c.require(d.jitter_sigma_ps >= 0.0, path + ".jitter_sigma_ps",
            "must be >= 0");
  c.require(d.dead_time_ps >= 0.0, path + ".dead_time_ps", "must be >= 0");
}

void check_mzi(IssueCollector& c, const MziParams& m, double pulse_interval,
               const std::string& path) {
  c.require(m.delay_bits >= 1, path + ".delay_bits", "must be >= 1");
  c.require(m.period_per_2pi_c > 0.0, path + ".period_per_2pi_c",
            "must be > 0");
  c.require(m.temperature_sigma_c >= 0.0, path + ".temperature_sigma_c",
            "must be >= 0");
  const double expected = m.delay_bits * pulse_interval;
  c.require(std::abs(m.delay_time_ps - expected) <= 1e-6 * expected,
            path + ".delay_time_ps",
            "must equal delay_bits * source.pulse_interval_ps (" +
                std::to_string(expected) + " ps)");
}

}  // namespace

double ChannelParams::component_db() const {
  double total = 0.0;
  for (const auto& item : excess_losses) total += item.db;
  return total;
}

double MziParams::phase_sigma_rad() const {
  return 2.0 * std::numbers::pi * temperature_sigma_c / period_per_2pi_c;
}

double PhaseNoiseModel::setting_sigma_rad() const {
  return 2.0 * std::numbers::pi * temperature_sigma_c / period_per_2pi_c;
}

ValidationError::ValidationError(std::vector<ValidationIssue> issues)
    : std::runtime_error(format_issues(issues)), issues_(std::move(issues)) {}

ValidatedScenario validate_scenario(const ExperimentScenario& s) {
  IssueCollector c;

  const auto& src = s.source;
  c.require(src.mu >= 0.0, "source.mu", "must be >= 0");
  c.require(src.pulse_width_ps > 0.0, "source.pulse_width_ps", "must be > 0");
  c.require(src.pulse_interval_ps > src.pulse_width_ps,
            "source.pulse_interval_ps", "must exceed pulse_width_ps");
  c.require(src.coherence_time_ps > 0.0, "source.coherence_time_ps",
            "must be > 0");
  c.require(
      src.intrinsic_visibility >= 0.0 && src.intrinsic_visibility <= 1.0,
      "source.intrinsic_visibility", "must be in [0,1]");
  c.require(src.pump_wavelength_nm > 0.0 && src.signal_wavelength_nm > 0.0 &&
                src.idler_wavelength_nm > 0.0,
            "source.wavelengths", "must be > 0");
  if (src.pump_wavelength_nm > 0.0 && src.signal_wavelength_nm > 0.0 &&
      src.idler_wavelength_nm > 0.0) {
    // f_p = f_s + f_i up to a relative tolerance of 1e-3.
    const double fp = 1.0 / src.pump_wavelength_nm;
    const double fsum =
        1.0 / src.signal_wavelength_nm + 1.0 / src.idler_wavelength_nm;
    c.require(std::abs(fp - fsum) / fp < 1e-3, "source.wavelengths",
              "energy conservation violated: 1/pump != 1/signal + 1/idler");
  }

  check_channel(c, s.channel_s, "channel_s");
  check_channel(c, s.channel_i, "channel_i");

  c.require(s.mzi_s.has_value() == s.mzi_i.has_value(), "mzi_s/mzi_i",
            "analyzers must be present on both arms or on neither");
  if (s.mzi_s) check_mzi(c, *s.mzi_s, src.pulse_interval_ps, "mzi_s");
  if (s.mzi_i) check_mzi(c, *s.mzi_i, src.pulse_interval_ps, "mzi_i");

  check_detector(c, s.detector_s, "detector_s");
  check_detector(c, s.detector_i, "detector_i");

  c.require(s.tia.resolution_ps > 0.0, "tia.resolution_ps", "must be > 0");
  c.require(s.tia.window_ps >= s.tia.resolution_ps, "tia.window_ps",
            "must be >= resolution_ps");
  c.require(s.tia.histogram_range_ps >= 4.0 * src.pulse_interval_ps,
            "tia.histogram_range_ps",
            "must span at least several pulse intervals");
  c.require(s.tia.chunk_duration_s > 0.0, "tia.chunk_duration_s",
            "must be > 0");

  c.require(s.drift.magnitude_ps_per_hour >= 0.0,
            "drift.magnitude_ps_per_hour", "must be >= 0");
  c.require(s.phase_noise.temperature_sigma_c >= 0.0,
            "phase_noise.temperature_sigma_c", "must be >= 0");
  c.require(s.phase_noise.period_per_2pi_c > 0.0,
            "phase_noise.period_per_2pi_c", "must be > 0");
  c.require(s.phase_noise.pump_drift_rad_per_hour >= 0.0,
            "phase_noise.pump_drift_rad_per_hour", "must be >= 0");
  c.require(s.phase_noise.calibration_interval_hours > 0.0,
            "phase_noise.calibration_interval_hours", "must be > 0");

  c.require(s.duration_s > 0.0, "duration_s", "must be > 0");

  if (!c.empty()) throw ValidationError(c.take());
  return ValidatedScenario(s);
}

double arm_efficiency(const ChannelParams& channel,
                      const DetectorParams& det) {
  return db_to_transmittance(channel.fiber_db() + channel.component_db()) *
         det.efficiency;
}

}  // namespace tbsim
