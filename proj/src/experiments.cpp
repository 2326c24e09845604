#include "tbsim/experiments.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "tbsim/quantum.hpp"
#include "tbsim/tia.hpp"

namespace tbsim {

namespace {

constexpr std::uint64_t kStreamSettingS = 0x11;
constexpr std::uint64_t kStreamSettingI = 0x12;

// Fresh analyzer-setting error for one measurement point: the temperature
// controller is re-set at every point, so errors are independent draws.
double setting_error(const ValidatedScenario& scenario, std::uint64_t seed,
                     std::uint64_t stream, std::uint64_t index) {
  const double sigma = scenario->phase_noise.setting_sigma_rad();
  if (sigma <= 0.0) return 0.0;
  std::mt19937_64 rng(derive_seed(seed, stream, index));
  return std::normal_distribution<double>(0.0, sigma)(rng);
}

// The runner owns the per-point setting errors; generation keeps only the
// pump-drift part of the phase noise so the error is not applied twice.
ExperimentScenario without_setting_noise(const ExperimentScenario& s) {
  ExperimentScenario out = s;
  out.phase_noise.temperature_sigma_c = 0.0;
  return out;
}

// Measurement points occupy consecutive blocks on the campaign clock,
// rounded up to the generation chunk so every point starts on a boundary.
double block_seconds(double seconds) {
  return std::ceil(seconds / kGenerationChunkSeconds - 1e-9) *
         kGenerationChunkSeconds;
}

// track_center carries the traced peak position across measurement points
// of one campaign; the peak drifts continuously while settings change.
double measure_counts(const ValidatedScenario& scenario, double theta_s,
                      double theta_i, double start_s, double stop_s,
                      std::uint64_t seed, bool track, double* track_center) {
  const GeneratedRun run = generate_streams_between(scenario, theta_s,
                                                    theta_i, start_s, stop_s,
                                                    seed);
  if (track) {
    const PeakTrack t =
        track_peak(run.signal, run.idler, scenario->tia, *track_center);
    *track_center = t.final_center_ps;
    return static_cast<double>(t.total);
  }
  const CoincidenceHistogram h =
      correlate(run.signal, run.idler, scenario->tia);
  return static_cast<double>(
      windowed_count(h, 0.0, scenario->tia.window_ps));
}

}  // namespace

FringeRunResult run_fringe(const ValidatedScenario& scenario,
                           const FringeSweep& sweep, double hours_per_point,
                           std::uint64_t seed, bool analytic, bool track) {
  const auto& s = *scenario;
  if (!s.analyzers_present()) {
    throw std::invalid_argument("run_fringe: scenario has no analyzers");
  }
  if (sweep.step_c <= 0.0 || sweep.stop_c < sweep.start_c) {
    throw std::invalid_argument("run_fringe: bad sweep range");
  }
  if (hours_per_point <= 0.0) {
    throw std::invalid_argument("run_fringe: hours_per_point must be > 0");
  }

  const RateModel model = make_rate_model(scenario);
  const double theta_s = s.mzi_s->phase();
  const double seconds = hours_per_point * 3600.0;

  const ValidatedScenario quiet =
      validate_scenario(without_setting_noise(s));

  FringeRunResult out;
  out.expected_visibility = expected_visibility(model, s.tia.window_ps);

  std::vector<double> phases;
  std::vector<double> counts;
  double track_center = 0.0;
  int index = 0;
  for (double t = sweep.start_c; t <= sweep.stop_c + 1e-9;
       t += sweep.step_c, ++index) {
    const double theta_i = s.mzi_i->phase_at(t);
    double c;
    if (analytic) {
      c = coincidence_rate_hz(theta_s, theta_i, model, s.tia.window_ps) *
          seconds;
    } else {
      const double eps_s = setting_error(scenario, seed, kStreamSettingS,
                                         static_cast<std::uint64_t>(index));
      const double eps_i = setting_error(scenario, seed, kStreamSettingI,
                                         static_cast<std::uint64_t>(index));
      const double block = block_seconds(seconds);
      c = measure_counts(quiet, theta_s + eps_s, theta_i + eps_i,
                         index * block, index * block + seconds, seed, track,
                         &track_center);
    }
    phases.push_back(theta_i);
    counts.push_back(c);
    out.points.push_back({t, theta_i, c, 0.0});
  }

  out.fit = fit_fringe(phases, counts);
  for (auto& p : out.points) p.fit_value = out.fit.value_at(p.phase_rad);
  return out;
}

ChshRunResult run_chsh(const ValidatedScenario& scenario, double theta_s0,
                       double theta_i0, double hours_per_setting,
                       std::uint64_t seed, bool analytic, bool track) {
  const auto& s = *scenario;
  if (!s.analyzers_present()) {
    throw std::invalid_argument("run_chsh: scenario has no analyzers");
  }
  if (hours_per_setting <= 0.0) {
    throw std::invalid_argument("run_chsh: hours_per_setting must be > 0");
  }

  ChshRunResult out;
  out.settings = ChshSettings{theta_s0, theta_i0};
  out.hours_per_setting = hours_per_setting;
  const RateModel model = make_rate_model(scenario);
  out.expected_visibility = expected_visibility(model, s.tia.window_ps);
  const double seconds = hours_per_setting * 3600.0;

  const ValidatedScenario quiet =
      validate_scenario(without_setting_noise(s));

  std::array<std::array<CountWithSigma, 4>, 4> counts{};
  double track_center = 0.0;
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 4; ++col) {
      const auto [a, b] = out.settings.setting(row, col);
      const int j = row * 4 + col;
      double c;
      if (analytic) {
        c = coincidence_rate_hz(a, b, model, s.tia.window_ps) * seconds;
      } else {
        const double eps_s = setting_error(scenario, seed, kStreamSettingS,
                                           static_cast<std::uint64_t>(j));
        const double eps_i = setting_error(scenario, seed, kStreamSettingI,
                                           static_cast<std::uint64_t>(j));
        const double block = block_seconds(seconds);
        c = measure_counts(quiet, a + eps_s, b + eps_i, j * block,
                           j * block + seconds, seed, track, &track_center);
      }
      counts[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)] =
          {c, 0.0};
    }
  }

  // Per-count uncertainty: Poisson plus the fringe slope times the phase
  // setting error. The slope is estimated from the measured table itself:
  // the sixteen canonical settings average to the fringe mean, and the E
  // magnitudes give the visibility.
  double mean = 0.0;
  for (const auto& row : counts) {
    for (const auto& c : row) mean += c.value;
  }
  mean /= 16.0;
  double v_hat = 0.0;
  bool e_defined = true;
  for (const auto& row : counts) {
    double total = 0.0;
    for (const auto& c : row) total += c.value;
    if (total <= 0.0) {
      e_defined = false;
      break;
    }
    const double num =
        row[0].value - row[1].value - row[2].value + row[3].value;
    v_hat += std::abs(num / total);
  }
  v_hat = e_defined ? std::min(v_hat / 4.0 * std::numbers::sqrt2, 1.0) : 0.0;
  const double slope = mean * v_hat / std::numbers::sqrt2;
  const double sigma_setting = s.phase_noise.setting_sigma_rad();
  const double sigma_theta =
      analytic ? 0.0 : std::hypot(sigma_setting, sigma_setting);
  for (auto& row : counts) {
    for (auto& c : row) c.sigma = count_sigma(c.value, slope, sigma_theta);
  }

  out.result = chsh_s(counts);
  return out;
}

CarPoint run_car_point(const ValidatedScenario& scenario, double mu,
                       std::uint64_t seed) {
  ExperimentScenario adjusted = *scenario;
  adjusted.source.mu = mu;
  const ValidatedScenario scn = validate_scenario(adjusted);
  const auto& s = *scn;

  const GeneratedRun run =
      generate_streams(scn, 0.0, 0.0, s.duration_s, seed);
  const CoincidenceHistogram h = correlate(run.signal, run.idler, s.tia);

  CarPoint p;
  p.mu = mu;
  p.matched_counts =
      static_cast<double>(windowed_count(h, 0.0, s.tia.window_ps));

  // Mean count over every unmatched slot window that fits in range.
  const double slot = s.source.pulse_interval_ps;
  const auto k_max = static_cast<int>(
      std::floor((s.tia.histogram_range_ps / 2.0 - s.tia.window_ps / 2.0) /
                 slot));
  std::uint64_t acc = 0;
  int n_slots = 0;
  const int side_peak_bits =
      s.analyzers_present() ? s.mzi_s->delay_bits : -1;
  for (int k = 1; k <= k_max; ++k) {
    if (k == side_peak_bits) continue;  // true side peaks, not accidentals
    acc += windowed_count(h, k * slot, s.tia.window_ps);
    acc += windowed_count(h, -k * slot, s.tia.window_ps);
    n_slots += 2;
  }
  p.mean_accidentals_per_slot =
      n_slots > 0 ? static_cast<double>(acc) / n_slots : 0.0;
  p.car_value = p.mean_accidentals_per_slot > 0.0
                    ? p.matched_counts / p.mean_accidentals_per_slot
                    : std::numeric_limits<double>::infinity();
  return p;
}

std::vector<CarPoint> car_curve(const ValidatedScenario& scenario,
                                const std::vector<double>& mu_grid) {
  const auto& s = *scenario;
  const double alpha_s = arm_efficiency(s.channel_s, s.detector_s);
  const double alpha_i = arm_efficiency(s.channel_i, s.detector_i);
  const double d_s = dark_probability_per_window(s.detector_s.dark_rate_hz,
                                                 s.tia.window_ps);
  const double d_i = dark_probability_per_window(s.detector_i.dark_rate_hz,
                                                 s.tia.window_ps);
  std::vector<CarPoint> out;
  out.reserve(mu_grid.size());
  for (const double mu : mu_grid) {
    CarPoint p;
    p.mu = mu;
    p.car_value = car(mu, alpha_s, alpha_i, d_s, d_i);
    out.push_back(p);
  }
  return out;
}

}  // namespace tbsim
