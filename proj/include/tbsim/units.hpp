#pragma once

#include <cstdint>

namespace tbsim {

// Unit conventions used throughout: timestamps and delays in picoseconds
// (int64 for event data), rates in Hz, losses in dB at interfaces and as
// linear transmittance internally.

inline constexpr double kPsPerSecond = 1e12;
inline constexpr double kPsPerHour = 3.6e15;
inline constexpr double kHoursPerDay = 24.0;

/// Converts a loss in dB to linear transmittance 10^(-dB/10).
/// Negative losses are rejected.
double db_to_transmittance(double loss_db);

/// Inverse of db_to_transmittance.
double transmittance_to_db(double transmittance);

/// MZI tuning curve: 2*pi*(T - T_ref)/period. Not reduced modulo 2*pi;
/// callers reduce when comparing settings.
double phase_from_temperature(double temperature_c, double reference_c,
                              double period_per_2pi_c);

/// Number of mutually coherent pump slots, floor(coherence/interval),
/// clamped to at least one slot.
std::int64_t estimate_dimension(double coherence_time_ps,
                                double pulse_interval_ps);

/// Dark count probability within one coincidence window.
double dark_probability_per_window(double dark_rate_hz, double window_ps);

/// Gaussian sigma for a timing response quoted as FWHM.
double fwhm_to_sigma(double fwhm);

}  // namespace tbsim
