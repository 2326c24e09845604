#include "tbsim/quantum.hpp"

#include <cmath>
#include <stdexcept>

namespace tbsim {

double JointSlotDistribution::weight(std::int64_t signal_slot,
                                     std::int64_t idler_slot) const {
  auto it = weights.find({signal_slot, idler_slot});
  return it == weights.end() ? 0.0 : it->second;
}

double JointSlotDistribution::total_weight() const {
  double total = 0.0;
  for (const auto& [slots, w] : weights) total += w;
  return total;
}

namespace {

std::vector<double> marginal_occupancy(std::int64_t dimension,
                                       int delay_bits) {
  // Short and long path populate slots k and k+n with equal weight; the
  // cross terms vanish once the partner is traced over both output ports.
  std::vector<double> occupancy(static_cast<std::size_t>(dimension) +
                                delay_bits);
  for (std::int64_t slot = 1; slot <= dimension + delay_bits; ++slot) {
    double w = 0.0;
    if (slot <= dimension) w += 1.0;              // short path from slot k
    if (slot > delay_bits) w += 1.0;              // long path from slot k-n
    occupancy[static_cast<std::size_t>(slot - 1)] = w;
  }
  return occupancy;
}

}  // namespace

std::vector<double> JointSlotDistribution::signal_marginal() const {
  return marginal_occupancy(dimension, delay_bits);
}

std::vector<double> JointSlotDistribution::idler_marginal() const {
  return marginal_occupancy(dimension, delay_bits);
}

JointSlotDistribution joint_slot_distribution(std::int64_t dimension,
                                              int delay_bits, double theta_s,
                                              double theta_i) {
  if (delay_bits < 1 || delay_bits >= dimension) {
    throw std::invalid_argument(
        "joint_slot_distribution: requires 1 <= n < N");
  }
  JointSlotDistribution dist;
  dist.dimension = dimension;
  dist.delay_bits = delay_bits;
  dist.theta_sum = theta_s + theta_i;

  // |1 + e^{i theta_sum}|^2
  const double interfering = 2.0 * (1.0 + std::cos(dist.theta_sum));
  const std::int64_t n = delay_bits;
  for (std::int64_t k = 1; k <= dimension + n; ++k) {
    double w;
    if (k <= n || k > dimension) {
      w = 1.0;  // single contributing path, unit modulus phase factor
    } else {
      w = interfering;
    }
    dist.weights[{k, k}] = w;
  }
  // Side classes: signal short / idler long and vice versa. One path each,
  // phase-independent.
  for (std::int64_t k = 1; k <= dimension; ++k) {
    dist.weights[{k, k + n}] = 1.0;
    dist.weights[{k + n, k}] = 1.0;
  }
  return dist;
}

FransonWeights franson_peak_weights(double theta_sum, double v0) {
  FransonWeights w;
  w.central = (1.0 + v0 * std::cos(theta_sum)) / 8.0;
  w.side = 1.0 / 16.0;
  return w;
}

RateModel make_rate_model(const ValidatedScenario& scenario) {
  const auto& s = *scenario;
  RateModel m;
  m.rep_rate_hz = s.source.rep_rate_hz();
  m.mu = s.source.mu;
  m.eta_s = arm_efficiency(s.channel_s, s.detector_s);
  m.eta_i = arm_efficiency(s.channel_i, s.detector_i);
  m.dark_s_hz = s.detector_s.dark_rate_hz;
  m.dark_i_hz = s.detector_i.dark_rate_hz;
  m.v0 = s.source.intrinsic_visibility;
  m.analyzers = s.analyzers_present();
  return m;
}

namespace {

double singles_probability_per_slot(double mu, double eta, bool analyzers) {
  return analyzers ? mu * eta / 2.0 : mu * eta;
}

}  // namespace

double expected_accidentals_hz(const RateModel& m, double window_ps) {
  const double p_s = singles_probability_per_slot(m.mu, m.eta_s, m.analyzers) +
                     dark_probability_per_window(m.dark_s_hz, window_ps);
  const double p_i = singles_probability_per_slot(m.mu, m.eta_i, m.analyzers) +
                     dark_probability_per_window(m.dark_i_hz, window_ps);
  return m.rep_rate_hz * p_s * p_i;
}

double coincidence_rate_hz(double theta_s, double theta_i, const RateModel& m,
                           double window_ps) {
  double true_rate;
  if (m.analyzers) {
    true_rate = m.rep_rate_hz * m.mu * m.eta_s * m.eta_i *
                (1.0 + m.v0 * std::cos(theta_s + theta_i)) / 8.0;
  } else {
    true_rate = m.rep_rate_hz * m.mu * m.eta_s * m.eta_i;
  }
  return true_rate + expected_accidentals_hz(m, window_ps);
}

double expected_visibility(const RateModel& m, double window_ps) {
  const double c_interf = m.mu * m.eta_s * m.eta_i / 4.0;
  if (c_interf <= 0.0) return 0.0;
  const double c_acc = expected_accidentals_hz(m, window_ps) / m.rep_rate_hz;
  return m.v0 * c_interf / (c_interf + 2.0 * c_acc);
}

double car(double mu, double alpha_s, double alpha_i, double d_s, double d_i) {
  if (mu < 0.0 || alpha_s < 0.0 || alpha_i < 0.0 || d_s < 0.0 || d_i < 0.0) {
    throw std::invalid_argument("car: inputs must be >= 0");
  }
  const double acc = (mu * alpha_s + d_s) * (mu * alpha_i + d_i);
  if (acc <= 0.0) {
    throw std::domain_error(
        "car: undefined, accidental rate is zero (mu = 0 with dark-free arm)");
  }
  return (mu * alpha_s * alpha_i + acc) / acc;
}

double optimal_mu(double alpha_s, double alpha_i, double d_s, double d_i) {
  if (alpha_s <= 0.0 || alpha_i <= 0.0) {
    throw std::invalid_argument("optimal_mu: transmittances must be > 0");
  }
  if (d_s <= 0.0 || d_i <= 0.0) {
    throw std::invalid_argument("optimal_mu: dark probabilities must be > 0");
  }
  return std::sqrt(d_s * d_i / (alpha_s * alpha_i));
}

}  // namespace tbsim
