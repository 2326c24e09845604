#include "tbsim/units.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tbsim {

double db_to_transmittance(double loss_db) {
  if (loss_db < 0.0) {
    throw std::invalid_argument("db_to_transmittance: loss must be >= 0 dB");
  }
  return std::pow(10.0, -loss_db / 10.0);
}

double transmittance_to_db(double transmittance) {
  if (transmittance <= 0.0 || transmittance > 1.0) {
    throw std::invalid_argument("transmittance_to_db: value must be in (0,1]");
  }
  return -10.0 * std::log10(transmittance);
}

double phase_from_temperature(double temperature_c, double reference_c,
                              double period_per_2pi_c) {
  if (period_per_2pi_c <= 0.0) {
    throw std::invalid_argument("phase_from_temperature: period must be > 0");
  }
  return 2.0 * std::numbers::pi * (temperature_c - reference_c) /
         period_per_2pi_c;
}

std::int64_t estimate_dimension(double coherence_time_ps,
                                double pulse_interval_ps) {
  if (coherence_time_ps <= 0.0 || pulse_interval_ps <= 0.0) {
    throw std::invalid_argument("estimate_dimension: inputs must be > 0");
  }
  auto n = static_cast<std::int64_t>(
      std::floor(coherence_time_ps / pulse_interval_ps));
  return n < 1 ? 1 : n;
}

double dark_probability_per_window(double dark_rate_hz, double window_ps) {
  if (dark_rate_hz < 0.0 || window_ps < 0.0) {
    throw std::invalid_argument(
        "dark_probability_per_window: inputs must be >= 0");
  }
  return dark_rate_hz * window_ps / kPsPerSecond;
}

double fwhm_to_sigma(double fwhm) {
  // FWHM = 2 sqrt(2 ln 2) sigma for a Gaussian response.
  return fwhm / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
}

}  // namespace tbsim
