#pragma once

#include <array>
#include <utility>
#include <vector>

namespace tbsim {

/// Result of fitting counts to r0 * (1 + v cos(theta + phi0)). The fit is
/// linear in (r0, r0 v cos phi0, -r0 v sin phi0) and is solved without
/// statistical weighting; uncertainties come from the unweighted residual
/// covariance. v is clamped to [0,1] for reporting, v_unclamped keeps the
/// raw estimate.
struct FringeFit {
  double r0 = 0.0;
  double v = 0.0;
  double phi0 = 0.0;
  double sigma_r0 = 0.0;
  double sigma_v = 0.0;
  double sigma_phi0 = 0.0;
  double v_unclamped = 0.0;
  double residual_rms = 0.0;

  double value_at(double phase_rad) const;
};

/// Unweighted least-squares fringe fit. Requires at least four distinct
/// settings spanning more than pi radians.
FringeFit fit_fringe(const std::vector<double>& phases_rad,
                     const std::vector<double>& counts);

struct CountWithSigma {
  double value = 0.0;
  double sigma = 0.0;
};

struct EValue {
  double e = 0.0;
  double sigma = 0.0;
};

/// Correlation coefficient from the four rates of one analyzer pair,
/// ordered R(a,b), R(a,b+pi), R(a+pi,b), R(a+pi,b+pi):
///   E = (R1 - R2 - R3 + R4) / (R1 + R2 + R3 + R4).
/// The error treats the numerator and denominator totals as independent
/// first-order aggregates of the per-count sigmas.
EValue chsh_e(const std::array<CountWithSigma, 4>& r);

/// Analyzer phase pairs for the S measurement, derived from the
/// coincidence-maximizing phases (theta_s0, theta_i0):
///   d_s = theta_s0          d'_s = theta_s0 + pi/2
///   d_i = theta_i0 - pi/4   d'_i = theta_i0 + pi/4
/// With the fringe law 1 + V cos(theta_s + theta_i) these four pairs put
/// the subtracted correlator at 3pi/4 and the rest at +-pi/4, giving
/// S = 2 sqrt(2) V.
struct ChshSettings {
  double theta_s0 = 0.0;
  double theta_i0 = 0.0;

  double d_s() const;
  double d_s_prime() const;
  double d_i() const;
  double d_i_prime() const;

  /// Analyzer phases for measurement (row, col): row selects the analyzer
  /// pair in the order (d,d), (d,d'), (d',d), (d',d'); col selects the four
  /// phase combinations entering E.
  std::pair<double, double> setting(int row, int col) const;
};

struct ChshResult {
  std::array<std::array<CountWithSigma, 4>, 4> counts{};
  std::array<EValue, 4> e_values{};
  double s = 0.0;
  double sigma_s = 0.0;
  double significance = 0.0;  // (|S| - 2) / sigma_s
};

/// S = E1 + E2 + E3 - E4 from the four count quadruples, rows ordered as in
/// ChshSettings. sigma_S adds the E errors in quadrature.
ChshResult chsh_s(const std::array<std::array<CountWithSigma, 4>, 4>& counts);

/// Count uncertainty combining Poisson statistics with the phase-setting
/// term: sqrt(R + (dR/dtheta * sigma_theta)^2). sigma_theta is the total
/// phase error; combine the per-analyzer errors in quadrature first.
double count_sigma(double counts, double dr_dtheta, double sigma_theta);

}  // namespace tbsim
