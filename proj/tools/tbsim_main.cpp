// Command-line front end: scenario-driven experiment runs with CSV/JSON
// outputs and a manifest per invocation for bit-exact replay.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tbsim/experiments.hpp"
#include "tbsim/io.hpp"
#include "tbsim/planner.hpp"
#include "tbsim/quantum.hpp"
#include "tbsim/scenario_json.hpp"
#include "tbsim/tia.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitIo = 4;

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

struct CommonOpts {
  std::string scenario_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  double hours = 0.0;
  bool hours_set = false;
  bool analytic = false;
  bool track = true;
  double window_ps = 0.0;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_scenario = true) {
  auto* s = cmd->add_option("--scenario", opts.scenario_path,
                            "Scenario file (JSON)");
  if (needs_scenario) s->required();
  cmd->add_option("--out", opts.out_dir, "Output directory");
  cmd->add_option("--seed", opts.seed, "Random seed (overrides scenario)")
      ->each([&](const std::string&) { opts.seed_set = true; });
  cmd->add_option("--hours", opts.hours,
                  "Hours per measurement point/setting")
      ->each([&](const std::string&) { opts.hours_set = true; });
  cmd->add_flag("--analytic", opts.analytic,
                "Closed-form rates instead of Monte Carlo");
  cmd->add_flag("--track,!--no-track", opts.track,
                "Track the coincidence peak per time chunk (default on)");
  cmd->add_option("--window-ps", opts.window_ps,
                  "Coincidence window override (ps)");
}

tbsim::ValidatedScenario load(const CommonOpts& opts) {
  tbsim::ValidatedScenario scn = tbsim::load_scenario(opts.scenario_path);
  tbsim::ExperimentScenario s = *scn;
  if (opts.window_ps > 0.0) s.tia.window_ps = opts.window_ps;
  return tbsim::validate_scenario(s);
}

std::uint64_t pick_seed(const CommonOpts& opts,
                        const tbsim::ValidatedScenario& scn) {
  return opts.seed_set ? opts.seed : scn->seed;
}

double pick_hours(const CommonOpts& opts, double fallback) {
  return opts.hours_set ? opts.hours : fallback;
}

class ManifestWriter {
 public:
  ManifestWriter(std::string command, std::vector<std::string> args,
                 const std::string& out_dir)
      : out_dir_(out_dir) {
    std::filesystem::create_directories(out_dir);
    manifest_.command = std::move(command);
    manifest_.args = std::move(args);
    manifest_.started_utc = utc_now();
  }

  std::string path(const std::string& name) {
    return (std::filesystem::path(out_dir_) / name).string();
  }

  void emit(const std::string& name, const std::string& content) {
    const std::string p = path(name);
    tbsim::write_text_file(p, content);
    manifest_.outputs.push_back(p);
  }

  void finish(const std::string& scenario_hash, std::uint64_t seed) {
    manifest_.scenario_hash = scenario_hash;
    manifest_.seed = seed;
    manifest_.finished_utc = utc_now();
    tbsim::write_text_file(path(manifest_.command + "_manifest.json"),
                           tbsim::manifest_json(manifest_));
  }

 private:
  std::string out_dir_;
  tbsim::RunManifest manifest_;
};

int dispatch(const std::vector<std::string>& args);

int cmd_fringe(const std::vector<std::string>& args, CLI::App& app,
               CommonOpts& opts, tbsim::FringeSweep& sweep) {
  const auto scn = load(opts);
  const auto seed = pick_seed(opts, scn);
  const double hours = pick_hours(opts, 1.0);
  ManifestWriter mw("fringe", args, opts.out_dir);
  const auto result = tbsim::run_fringe(scn, sweep, hours, seed,
                                        opts.analytic, opts.track);
  mw.emit("fringe.csv", tbsim::fringe_csv(result));
  mw.emit("fringe.json", tbsim::fringe_report_json(result));
  mw.finish(tbsim::scenario_hash(*scn), seed);
  std::printf("fringe: V = %.4f +- %.4f (expected %.4f), r0 = %.2f\n",
              result.fit.v, result.fit.sigma_v, result.expected_visibility,
              result.fit.r0);
  return kExitOk;
}

int cmd_chsh(const std::vector<std::string>& args, CLI::App& app,
             CommonOpts& opts, double theta_s0, double theta_i0) {
  const auto scn = load(opts);
  const auto seed = pick_seed(opts, scn);
  const double hours = pick_hours(opts, 1.0);
  ManifestWriter mw("chsh", args, opts.out_dir);
  const auto result = tbsim::run_chsh(scn, theta_s0, theta_i0, hours, seed,
                                      opts.analytic, opts.track);
  mw.emit("chsh_counts.csv", tbsim::chsh_counts_csv(result));
  mw.emit("chsh.json", tbsim::chsh_report_json(result));
  mw.finish(tbsim::scenario_hash(*scn), seed);
  std::printf("chsh: S = %.3f +- %.3f (violation %.2f sigma)\n",
              result.result.s, result.result.sigma_s,
              result.result.significance);
  return kExitOk;
}

int cmd_car_sweep(const std::vector<std::string>& args, CLI::App& app,
                  CommonOpts& opts, std::vector<double>& mu_grid,
                  std::string& mode) {
  const auto scn = load(opts);
  const auto seed = pick_seed(opts, scn);
  if (mu_grid.empty()) {
    throw std::invalid_argument("car-sweep: provide at least one --mu");
  }
  for (const double mu : mu_grid) {
    if (mu <= 0.0) {
      throw std::invalid_argument("car-sweep: mu values must be > 0");
    }
  }
  ManifestWriter mw("car_sweep", args, opts.out_dir);
  std::vector<tbsim::CarPoint> points;
  if (mode == "analytic" || opts.analytic) {
    points = tbsim::car_curve(scn, mu_grid);
  } else {
    for (std::size_t i = 0; i < mu_grid.size(); ++i) {
      points.push_back(tbsim::run_car_point(scn, mu_grid[i], seed + i));
    }
  }
  mw.emit("car.csv", tbsim::car_csv(points));
  mw.finish(tbsim::scenario_hash(*scn), seed);
  for (const auto& p : points) {
    std::printf("mu=%.3g  CAR=%.4g\n", p.mu, p.car_value);
  }
  return kExitOk;
}

int cmd_plan(const std::vector<std::string>& args, CLI::App& app,
             CommonOpts& opts, std::vector<double>& distances,
             std::string& criterion_name, double threshold,
             double loss_per_km, double counts_per_setting, int n_settings,
             double upgrade_efficiency) {
  const auto scn = load(opts);
  ManifestWriter mw("plan", args, opts.out_dir);

  const tbsim::RateModel model = tbsim::make_rate_model(scn);
  double base_rate = tbsim::coincidence_rate_hz(0.0, 0.0, model,
                                                scn->tia.window_ps) *
                     3600.0;
  const double base_km =
      scn->channel_s.fiber_length_km + scn->channel_i.fiber_length_km;
  if (upgrade_efficiency > 0.0) {
    base_rate *= (upgrade_efficiency / scn->detector_s.efficiency) *
                 (upgrade_efficiency / scn->detector_i.efficiency);
  }

  std::vector<tbsim::PlanRow> rows;
  for (const double km : distances) {
    tbsim::PlanRow row;
    row.distance_km = km;
    row.fiber_loss_db = km * loss_per_km;
    row.rate_per_hour =
        tbsim::rate_at_distance(base_rate, base_km, km, loss_per_km);
    row.duration_days = tbsim::chsh_duration_hours(row.rate_per_hour,
                                                   counts_per_setting,
                                                   n_settings) /
                        tbsim::kHoursPerDay;
    rows.push_back(row);
  }

  tbsim::DistanceCriterion criterion;
  criterion.kind = criterion_name == "car"
                       ? tbsim::DistanceCriterion::Kind::car
                       : tbsim::DistanceCriterion::Kind::visibility;
  criterion.threshold = threshold;
  const double max_km = tbsim::max_distance_km(scn, criterion);

  mw.emit("plan.csv", tbsim::plan_csv(rows));
  mw.emit("plan.json",
          tbsim::plan_report_json(rows, max_km,
                                  criterion_name + ">=" +
                                      tbsim::format_double(threshold)));
  mw.finish(tbsim::scenario_hash(*scn), 0);

  std::printf("%10s %12s %12s %14s\n", "km", "loss_dB", "rate/h", "days");
  for (const auto& r : rows) {
    std::printf("%10.0f %12.2f %12.4g %14.4g\n", r.distance_km,
                r.fiber_loss_db, r.rate_per_hour, r.duration_days);
  }
  std::printf("max distance for %s >= %g: %.0f km\n", criterion_name.c_str(),
              threshold, max_km);
  return kExitOk;
}

int cmd_streams(const std::vector<std::string>& args, CLI::App& app,
                CommonOpts& opts, double theta_s, double theta_i) {
  const auto scn = load(opts);
  const auto seed = pick_seed(opts, scn);
  const double hours = pick_hours(opts, scn->duration_s / 3600.0);
  ManifestWriter mw("streams", args, opts.out_dir);
  const auto run =
      tbsim::generate_streams(scn, theta_s, theta_i, hours * 3600.0, seed);
  const std::string hash = tbsim::scenario_hash(*scn);
  tbsim::write_stream_file(mw.path("signal.txt"), run.signal, hash, seed);
  tbsim::write_stream_file(mw.path("idler.txt"), run.idler, hash, seed);
  const auto hist = tbsim::correlate(run.signal, run.idler, scn->tia);
  mw.emit("histogram.csv", tbsim::histogram_csv(hist));
  const auto track = tbsim::track_peak(run.signal, run.idler, scn->tia);
  mw.emit("track.csv", tbsim::track_csv(track));
  mw.finish(hash, seed);
  std::printf("streams: %zu signal, %zu idler events; tracked counts %llu\n",
              run.signal.size(), run.idler.size(),
              static_cast<unsigned long long>(track.total));
  return kExitOk;
}

int cmd_validate(CommonOpts& opts) {
  const auto scn = tbsim::load_scenario(opts.scenario_path);
  std::printf("ok: %s (hash %s)\n", opts.scenario_path.c_str(),
              tbsim::scenario_hash(*scn).c_str());
  return kExitOk;
}

int cmd_replay(const std::string& manifest_path) {
  const auto manifest =
      tbsim::manifest_from_json(tbsim::read_text_file(manifest_path));
  if (manifest.args.empty()) {
    throw std::runtime_error("replay: manifest carries no arguments");
  }
  return dispatch(manifest.args);
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"time-bin entanglement distribution simulator"};
  app.require_subcommand(1);

  CommonOpts fringe_opts;
  tbsim::FringeSweep sweep;
  auto* fringe = app.add_subcommand(
      "fringe", "Sweep the idler analyzer temperature and fit the fringe");
  add_common(fringe, fringe_opts);
  fringe->add_option("--sweep-start", sweep.start_c, "Start temperature (C)")
      ->required();
  fringe->add_option("--sweep-stop", sweep.stop_c, "Stop temperature (C)")
      ->required();
  fringe->add_option("--sweep-step", sweep.step_c,
                     "Temperature step (C, default 0.1)");

  CommonOpts chsh_opts;
  double theta_s0 = 0.0;
  double theta_i0 = 0.0;
  auto* chsh = app.add_subcommand(
      "chsh", "Run the 16-setting S-value measurement");
  add_common(chsh, chsh_opts);
  chsh->add_option("--theta-s0", theta_s0,
                   "Signal phase maximizing coincidences (rad)");
  chsh->add_option("--theta-i0", theta_i0,
                   "Idler phase maximizing coincidences (rad)");

  CommonOpts car_opts;
  std::vector<double> mu_grid;
  std::string car_mode = "analytic";
  auto* car = app.add_subcommand(
      "car-sweep", "Coincidence-to-accidental ratio over a mu grid");
  add_common(car, car_opts);
  car->add_option("--mu", mu_grid, "Mean pairs per pulse (repeatable)")
      ->required();
  car->add_option("--mode", car_mode, "analytic|montecarlo")
      ->check(CLI::IsMember({"analytic", "montecarlo"}));

  CommonOpts plan_opts;
  std::vector<double> distances;
  std::string criterion_name = "visibility";
  double threshold = 0.71;
  double loss_per_km = tbsim::kNominalFiberLossDbPerKm;
  double counts_per_setting = 100.0;
  int n_settings = 16;
  double upgrade_efficiency = 0.0;
  auto* plan = app.add_subcommand(
      "plan", "Rate/duration projections versus distance");
  add_common(plan, plan_opts);
  plan->add_option("--distances", distances, "Total fiber distances (km)");
  plan->add_option("--criterion", criterion_name, "visibility|car")
      ->check(CLI::IsMember({"visibility", "car"}));
  plan->add_option("--threshold", threshold, "Criterion threshold");
  plan->add_option("--loss-per-km", loss_per_km,
                   "Projection fiber loss (dB/km, default 0.2 nominal)");
  plan->add_option("--counts-per-setting", counts_per_setting,
                   "Target counts per analyzer setting");
  plan->add_option("--n-settings", n_settings, "Number of settings");
  plan->add_option("--detector-efficiency", upgrade_efficiency,
                   "What-if detector efficiency for both arms");

  CommonOpts streams_opts;
  double theta_s = 0.0;
  double theta_i = 0.0;
  auto* streams = app.add_subcommand(
      "streams", "Export raw timestamp streams and their histogram");
  add_common(streams, streams_opts);
  streams->add_option("--theta-s", theta_s, "Signal analyzer phase (rad)");
  streams->add_option("--theta-i", theta_i, "Idler analyzer phase (rad)");

  CommonOpts validate_opts;
  auto* validate = app.add_subcommand("validate", "Validate a scenario file");
  validate->add_option("--scenario", validate_opts.scenario_path,
                       "Scenario file (JSON)")
      ->required();

  std::string manifest_path;
  auto* replay = app.add_subcommand(
      "replay", "Re-run a recorded manifest, reproducing outputs");
  replay->add_option("manifest", manifest_path, "Manifest JSON path")
      ->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (fringe->parsed()) return cmd_fringe(args, app, fringe_opts, sweep);
  if (chsh->parsed())
    return cmd_chsh(args, app, chsh_opts, theta_s0, theta_i0);
  if (car->parsed())
    return cmd_car_sweep(args, app, car_opts, mu_grid, car_mode);
  if (plan->parsed())
    return cmd_plan(args, app, plan_opts, distances, criterion_name,
                    threshold, loss_per_km, counts_per_setting, n_settings,
                    upgrade_efficiency);
  if (streams->parsed())
    return cmd_streams(args, app, streams_opts, theta_s, theta_i);
  if (validate->parsed()) return cmd_validate(validate_opts);
  if (replay->parsed()) return cmd_replay(manifest_path);
  return kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return dispatch(args);
  } catch (const tbsim::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return kExitValidation;
  } catch (const std::ios_base::failure& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
}
