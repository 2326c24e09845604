#pragma once

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "tbsim/scenario.hpp"

namespace tbsim {

/// Joint detection-slot distribution of one transmitted photon pair after
/// both delay-line analyzers, monitored output ports only. Slots are
/// 1-based; support lies on idler_slot - signal_slot in {-n, 0, +n}.
/// Diagonal weights carry the two-path interference |1 + e^{i(ts+ti)}|^2 in
/// the bulk and unit weight on the 2n boundary slots; the two side classes
/// carry unit weight per emission slot and no phase dependence. Weights are
/// unnormalized; only ratios are meaningful.
struct JointSlotDistribution {
  std::int64_t dimension = 0;  // N, coherent slot count
  int delay_bits = 0;          // n
  double theta_sum = 0.0;
  std::map<std::pair<std::int64_t, std::int64_t>, double> weights;

  double weight(std::int64_t signal_slot, std::int64_t idler_slot) const;
  double diagonal_weight(std::int64_t slot) const {
    return weight(slot, slot);
  }
  double total_weight() const;
  /// Fraction of diagonal slots whose two contributing paths interfere.
  double interfering_fraction() const {
    return static_cast<double>(dimension - delay_bits) / dimension;
  }

  /// Single-photon slot occupancy for one channel, indexed 1..N+n.
  /// Obtained by tracing the partner photon over both analyzer outputs,
  /// so it is independent of both phases (no single-photon interference).
  std::vector<double> signal_marginal() const;
  std::vector<double> idler_marginal() const;
};

/// Builds the distribution for N coherent slots and n-bit analyzers at
/// phases theta_s, theta_i. Requires 1 <= n < N.
JointSlotDistribution joint_slot_distribution(std::int64_t dimension,
                                              int delay_bits, double theta_s,
                                              double theta_i);

/// Relative detection probabilities per transmitted pair: the central
/// two-photon interference peak and each of the two side peaks. Central is
/// (1 + v0 cos(theta_sum))/8, each side 1/16; the remainder exits the
/// unmonitored analyzer ports.
struct FransonWeights {
  double central = 0.0;
  double side = 0.0;
  double total() const { return central + 2.0 * side; }
};
FransonWeights franson_peak_weights(double theta_sum, double v0 = 1.0);

/// Closed-form rate inputs for one experimental configuration.
/// eta_* are end-to-end transmittance times detector efficiency per arm,
/// excluding the analyzers' inherent splitting. With analyzers = false the
/// arms carry no interferometers (bare start-stop configuration).
struct RateModel {
  double rep_rate_hz = 2e9;
  double mu = 0.1;
  double eta_s = 1.0;
  double eta_i = 1.0;
  double dark_s_hz = 0.0;
  double dark_i_hz = 0.0;
  double v0 = 1.0;
  bool analyzers = true;

  /// Maximum true-coincidence rate over phases (v0 = 1).
  double ceiling_hz() const {
    return analyzers ? rep_rate_hz * mu * eta_s * eta_i / 4.0
                     : rep_rate_hz * mu * eta_s * eta_i;
  }
};

RateModel make_rate_model(const ValidatedScenario& scenario);

/// Accidental coincidence rate in the matched window: product of per-slot
/// singles probabilities (photon singles plus per-window dark probability)
/// times the repetition rate.
double expected_accidentals_hz(const RateModel& m, double window_ps);

/// Total coincidence rate at the given analyzer phases, true interference
/// term plus accidentals.
double coincidence_rate_hz(double theta_s, double theta_i, const RateModel& m,
                           double window_ps);

/// Emergent fringe visibility including multi-pair and dark accidentals:
/// V = v0 * C / (C + 2 A) with C = mu eta_s eta_i / 4 and A the per-pulse
/// accidental probability. Reduces to v0/(1+2 mu) without darks.
double expected_visibility(const RateModel& m, double window_ps);

/// Coincidence-to-accidental ratio
///   [mu a_s a_i + (mu a_s + d_s)(mu a_i + d_i)] /
///   [(mu a_s + d_s)(mu a_i + d_i)]
/// with d_* given as per-window dark probabilities.
double car(double mu, double alpha_s, double alpha_i, double d_s, double d_i);

/// The pair rate maximizing car(): sqrt(d_s d_i / (a_s a_i)).
double optimal_mu(double alpha_s, double alpha_i, double d_s, double d_i);

}  // namespace tbsim
