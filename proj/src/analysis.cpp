#include "tbsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace tbsim {

namespace {

using Mat3 = std::array<std::array<double, 3>, 3>;
using Vec3 = std::array<double, 3>;

double det3(const Mat3& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Mat3 inverse3(const Mat3& m) {
  const double d = det3(m);
  if (std::abs(d) < 1e-300) {
    throw std::runtime_error("fit_fringe: degenerate normal equations");
  }
  Mat3 inv;
  inv[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) / d;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) / d;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) / d;
  inv[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) / d;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) / d;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) / d;
  inv[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) / d;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) / d;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) / d;
  return inv;
}

}  // namespace

double FringeFit::value_at(double phase_rad) const {
  return r0 * (1.0 + v_unclamped * std::cos(phase_rad + phi0));
}

FringeFit fit_fringe(const std::vector<double>& phases_rad,
                     const std::vector<double>& counts) {
  if (phases_rad.size() != counts.size()) {
    throw std::invalid_argument("fit_fringe: size mismatch");
  }
  const std::size_t n = phases_rad.size();
  std::set<double> distinct(phases_rad.begin(), phases_rad.end());
  if (distinct.size() < 4) {
    throw std::invalid_argument(
        "fit_fringe: need at least four distinct settings");
  }
  const auto [mn, mx] =
      std::minmax_element(phases_rad.begin(), phases_rad.end());
  if (*mx - *mn <= std::numbers::pi) {
    throw std::invalid_argument(
        "fit_fringe: settings must span more than pi radians");
  }

  // Normal equations for y = a + b cos(theta) + c sin(theta).
  Mat3 xtx{};
  Vec3 xty{};
  for (std::size_t k = 0; k < n; ++k) {
    const Vec3 row{1.0, std::cos(phases_rad[k]), std::sin(phases_rad[k])};
    for (int i = 0; i < 3; ++i) {
      xty[i] += row[i] * counts[k];
      for (int j = 0; j < 3; ++j) xtx[i][j] += row[i] * row[j];
    }
  }
  const Mat3 inv = inverse3(xtx);
  Vec3 beta{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) beta[i] += inv[i][j] * xty[j];
  }
  const double a = beta[0];
  const double b = beta[1];
  const double c = beta[2];

  double ssr = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double fit =
        a + b * std::cos(phases_rad[k]) + c * std::sin(phases_rad[k]);
    const double r = counts[k] - fit;
    ssr += r * r;
  }
  const double dof = static_cast<double>(n) - 3.0;
  const double s2 = dof > 0.0 ? ssr / dof : 0.0;

  FringeFit fit;
  fit.r0 = a;
  const double amp = std::hypot(b, c);
  fit.v_unclamped = a != 0.0 ? amp / a : 0.0;
  fit.v = std::clamp(fit.v_unclamped, 0.0, 1.0);
  fit.phi0 = std::atan2(-c, b);
  fit.residual_rms = std::sqrt(ssr / static_cast<double>(n));

  // Propagate cov(a,b,c) = s2 * (X^T X)^-1 through the reparametrization.
  const double amp2 = amp * amp;
  Vec3 jv{};
  Vec3 jp{};
  if (a != 0.0 && amp > 0.0) {
    jv = {-amp / (a * a), b / (a * amp), c / (a * amp)};
    jp = {0.0, c / amp2, -b / amp2};
  }
  double var_r0 = s2 * inv[0][0];
  double var_v = 0.0;
  double var_p = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      var_v += jv[i] * s2 * inv[i][j] * jv[j];
      var_p += jp[i] * s2 * inv[i][j] * jp[j];
    }
  }
  fit.sigma_r0 = std::sqrt(std::max(var_r0, 0.0));
  fit.sigma_v = std::sqrt(std::max(var_v, 0.0));
  fit.sigma_phi0 = std::sqrt(std::max(var_p, 0.0));
  return fit;
}

EValue chsh_e(const std::array<CountWithSigma, 4>& r) {
  double total = 0.0;
  double sum_var = 0.0;
  for (const auto& c : r) {
    if (c.value < 0.0) {
      throw std::invalid_argument("chsh_e: counts must be >= 0");
    }
    total += c.value;
    sum_var += c.sigma * c.sigma;
  }
  if (total <= 0.0) {
    throw std::domain_error("chsh_e: undefined for zero total counts");
  }
  const double num = r[0].value - r[1].value - r[2].value + r[3].value;
  EValue out;
  out.e = num / total;
  out.sigma = std::sqrt((1.0 + out.e * out.e) * sum_var) / total;
  return out;
}

double ChshSettings::d_s() const { return theta_s0; }
double ChshSettings::d_s_prime() const {
  return theta_s0 + std::numbers::pi / 2.0;
}
double ChshSettings::d_i() const { return theta_i0 - std::numbers::pi / 4.0; }
double ChshSettings::d_i_prime() const {
  return theta_i0 + std::numbers::pi / 4.0;
}

std::pair<double, double> ChshSettings::setting(int row, int col) const {
  if (row < 0 || row > 3 || col < 0 || col > 3) {
    throw std::invalid_argument("ChshSettings::setting: index out of range");
  }
  const double a = (row & 2) ? d_s_prime() : d_s();
  const double b = (row & 1) ? d_i_prime() : d_i();
  const double pi = std::numbers::pi;
  const double da = (col == 2 || col == 3) ? pi : 0.0;
  const double db = (col == 1 || col == 3) ? pi : 0.0;
  return {a + da, b + db};
}

ChshResult chsh_s(const std::array<std::array<CountWithSigma, 4>, 4>& counts) {
  ChshResult res;
  res.counts = counts;
  for (int row = 0; row < 4; ++row) {
    res.e_values[static_cast<std::size_t>(row)] =
        chsh_e(counts[static_cast<std::size_t>(row)]);
  }
  res.s = res.e_values[0].e + res.e_values[1].e + res.e_values[2].e -
          res.e_values[3].e;
  double var = 0.0;
  for (const auto& ev : res.e_values) var += ev.sigma * ev.sigma;
  res.sigma_s = std::sqrt(var);
  res.significance =
      res.sigma_s > 0.0 ? (std::abs(res.s) - 2.0) / res.sigma_s : 0.0;
  return res;
}

double count_sigma(double counts, double dr_dtheta, double sigma_theta) {
  if (counts < 0.0) {
    throw std::invalid_argument("count_sigma: counts must be >= 0");
  }
  const double phase_term = dr_dtheta * sigma_theta;
  return std::sqrt(counts + phase_term * phase_term);
}

}  // namespace tbsim
