#pragma once

#include <string>
#include <vector>

#include "tbsim/analysis.hpp"
#include "tbsim/experiments.hpp"
#include "tbsim/montecarlo.hpp"
#include "tbsim/planner.hpp"
#include "tbsim/tia.hpp"

namespace tbsim {

std::string format_double(double value);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

std::string histogram_csv(const CoincidenceHistogram& h);
std::string track_csv(const PeakTrack& track);
std::string fringe_csv(const FringeRunResult& result);
std::string fringe_report_json(const FringeRunResult& result);
std::string chsh_counts_csv(const ChshRunResult& result);
std::string chsh_report_json(const ChshRunResult& result);
std::string car_csv(const std::vector<CarPoint>& points);

struct PlanRow {
  double distance_km = 0.0;
  double fiber_loss_db = 0.0;
  double rate_per_hour = 0.0;
  double duration_days = 0.0;
};
std::string plan_csv(const std::vector<PlanRow>& rows);
std::string plan_report_json(const std::vector<PlanRow>& rows,
                             double max_distance_km,
                             const std::string& criterion);

/// One-per-channel timestamp dump with a header carrying the scenario hash
/// and seed, sufficient for bit-exact replay checks.
void write_stream_file(const std::string& path, const EventStream& stream,
                       const std::string& scenario_hash, std::uint64_t seed);
EventStream read_stream_file(const std::string& path,
                             std::string* scenario_hash_out = nullptr,
                             std::uint64_t* seed_out = nullptr);

/// Record of one command invocation: what ran, on which scenario, with
/// which seed, and which files it produced.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  std::string scenario_hash;
  std::uint64_t seed = 0;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::string> outputs;
};

std::string manifest_json(const RunManifest& m);
RunManifest manifest_from_json(const std::string& text);

}  // namespace tbsim
