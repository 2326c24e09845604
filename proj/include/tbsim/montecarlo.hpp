#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "tbsim/scenario.hpp"

namespace tbsim {

enum class Channel { signal, idler };

enum class EventOrigin : std::uint8_t { pair = 0, single = 1, dark = 2 };

inline constexpr std::uint64_t kNoPairId =
    std::numeric_limits<std::uint64_t>::max();

/// Time-ordered detector clicks for one channel, picoseconds since the
/// experiment start. Timestamps are strictly increasing with consecutive
/// gaps of at least the detector dead time. origins/pair_ids are parallel
/// arrays filled only when tagging is enabled; pair_ids identifies
/// central-peak pair photons for ground-truth bookkeeping.
struct EventStream {
  Channel channel = Channel::signal;
  std::vector<std::int64_t> timestamps_ps;
  std::vector<EventOrigin> origins;
  std::vector<std::uint64_t> pair_ids;

  std::size_t size() const { return timestamps_ps.size(); }
  bool tagged() const { return !origins.empty() || timestamps_ps.empty(); }
};

struct GenerationOptions {
  bool tag_origins = false;
};

struct RunStats {
  std::uint64_t pairs_central = 0;
  std::uint64_t pairs_side = 0;
  std::uint64_t singles_s = 0;
  std::uint64_t singles_i = 0;
  std::uint64_t darks_s = 0;
  std::uint64_t darks_i = 0;
  /// Central-peak pairs with both photons surviving dead-time filtering.
  /// Only computed when tagging is enabled.
  std::uint64_t surviving_central_pairs = 0;
};

struct GeneratedRun {
  EventStream signal;
  EventStream idler;
  RunStats stats;
};

/// Generation is chunked into fixed windows; every random draw comes from a
/// sub-seed derived per (process, chunk), so long runs can be composed and
/// replayed piecewise and chunks may be produced independently.
inline constexpr double kGenerationChunkSeconds = 60.0;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id,
                          std::uint64_t index);

/// Idler arrival-time offset at absolute time t. Deterministic given the
/// model (random_walk draws from model.seed); zero at t = 0.
double drift_offset_ps(const DriftModel& model, double t_ps);

/// Analyzer phase at absolute time t: nominal value plus a setting error
/// resampled at each calibration interval plus pump drift accumulated since
/// the last calibration.
double perturb_phase(const PhaseNoiseModel& model, double theta_nominal,
                     double t_ps, std::uint64_t seed);

/// Generates both detector click streams for [0, duration_s) at nominal
/// analyzer phases theta_s, theta_i. Aggregate-rate Poisson sampling per
/// process class (coincident pairs per interference peak, unpaired singles,
/// dark counts), followed by timing jitter, idler drift, and dead-time
/// filtering. Deterministic given (scenario, phases, duration, seed).
GeneratedRun generate_streams(const ValidatedScenario& scenario,
                              double theta_s, double theta_i,
                              double duration_s, std::uint64_t seed,
                              const GenerationOptions& options = {});

/// Absolute-time variant covering [start_s, stop_s); chunk indices, drift,
/// and calibration intervals are anchored at t = 0, so consecutive calls
/// compose into one campaign. start_s must fall on a generation chunk
/// boundary.
GeneratedRun generate_streams_between(const ValidatedScenario& scenario,
                                      double theta_s, double theta_i,
                                      double start_s, double stop_s,
                                      std::uint64_t seed,
                                      const GenerationOptions& options = {});

}  // namespace tbsim
