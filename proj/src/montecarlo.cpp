#include "tbsim/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_set>

#include "tbsim/quantum.hpp"

namespace tbsim {

namespace {

// Process identifiers for sub-seed derivation.
constexpr std::uint64_t kStreamPairs = 0x01;
constexpr std::uint64_t kStreamSinglesS = 0x02;
constexpr std::uint64_t kStreamSinglesI = 0x03;
constexpr std::uint64_t kStreamDarksS = 0x04;
constexpr std::uint64_t kStreamDarksI = 0x05;
constexpr std::uint64_t kStreamPhaseS = 0x06;
constexpr std::uint64_t kStreamPhaseI = 0x07;
constexpr std::uint64_t kStreamDriftWalk = 0x08;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct RawEvent {
  std::int64_t t;
  EventOrigin origin;
  std::uint64_t pair_id;
};

bool raw_less(const RawEvent& a, const RawEvent& b) { return a.t < b.t; }

// Repairs the occasional local inversion left by jitter on an otherwise
// time-ordered sequence. O(N + inversions).
void fix_near_sorted(std::vector<RawEvent>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i].t < v[i - 1].t) {
      RawEvent e = v[i];
      std::size_t j = i;
      while (j > 0 && v[j - 1].t > e.t) {
        v[j] = v[j - 1];
        --j;
      }
      v[j] = e;
    }
  }
}

double walk_increment(std::uint64_t seed, std::uint64_t index, double sigma) {
  std::mt19937_64 rng(derive_seed(seed, kStreamDriftWalk, index));
  std::normal_distribution<double> gauss(0.0, sigma);
  return gauss(rng);
}

struct DriftSegment {
  double base = 0.0;      // offset at chunk start
  double slope = 0.0;     // ps of offset per ps of time
  double at(double t_ps, double chunk_start_ps) const {
    return base + slope * (t_ps - chunk_start_ps);
  }
};

DriftSegment drift_segment(const DriftModel& model, std::int64_t chunk_index) {
  DriftSegment seg;
  const double chunk_ps = kGenerationChunkSeconds * kPsPerSecond;
  switch (model.kind) {
    case DriftModel::Kind::none:
      break;
    case DriftModel::Kind::linear:
      seg.base = model.magnitude_ps_per_hour * chunk_index * chunk_ps /
                 kPsPerHour;
      seg.slope = model.magnitude_ps_per_hour / kPsPerHour;
      break;
    case DriftModel::Kind::random_walk: {
      const double sigma_step =
          model.magnitude_ps_per_hour * std::sqrt(chunk_ps / kPsPerHour);
      double base = 0.0;
      for (std::int64_t i = 0; i < chunk_index; ++i) {
        base += walk_increment(model.seed, static_cast<std::uint64_t>(i),
                               sigma_step);
      }
      seg.base = base;
      seg.slope = walk_increment(model.seed,
                                 static_cast<std::uint64_t>(chunk_index),
                                 sigma_step) /
                  chunk_ps;
      break;
    }
  }
  return seg;
}

struct ChunkRates {
  double pair_total_hz = 0.0;
  double central_fraction = 0.0;  // remaining split equally between sides
  double singles_s_hz = 0.0;
  double singles_i_hz = 0.0;
};

class StreamBuilder {
 public:
  StreamBuilder(Channel channel, bool tag, std::size_t reserve) {
    stream_.channel = channel;
    tag_ = tag;
    stream_.timestamps_ps.reserve(reserve);
    if (tag_) {
      stream_.origins.reserve(reserve);
      stream_.pair_ids.reserve(reserve);
    }
  }

  void append_merged_chunk(std::vector<RawEvent>& chunk) {
    fix_near_sorted(chunk);
    for (const RawEvent& e : chunk) {
      stream_.timestamps_ps.push_back(e.t);
      if (tag_) {
        stream_.origins.push_back(e.origin);
        stream_.pair_ids.push_back(e.pair_id);
      }
    }
  }

  // Chunk boundaries can leak a jittered event past its neighbour; repair
  // before dead-time filtering.
  void fix_boundaries() {
    auto& ts = stream_.timestamps_ps;
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (ts[i] < ts[i - 1]) {
        shift_back(i);
      }
    }
  }

  void apply_dead_time(double dead_time_ps,
                       std::unordered_set<std::uint64_t>* kept_pairs) {
    auto& ts = stream_.timestamps_ps;
    // one click per picosecond at most, even for an idealized detector
    const auto dead = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::llround(dead_time_ps)));
    std::size_t w = 0;
    std::int64_t last = std::numeric_limits<std::int64_t>::min();
    for (std::size_t r = 0; r < ts.size(); ++r) {
      if (last == std::numeric_limits<std::int64_t>::min() ||
          ts[r] - last >= dead) {
        ts[w] = ts[r];
        if (tag_) {
          stream_.origins[w] = stream_.origins[r];
          stream_.pair_ids[w] = stream_.pair_ids[r];
          if (kept_pairs && stream_.pair_ids[w] != kNoPairId) {
            kept_pairs->insert(stream_.pair_ids[w]);
          }
        }
        last = ts[r];
        ++w;
      }
    }
    ts.resize(w);
    if (tag_) {
      stream_.origins.resize(w);
      stream_.pair_ids.resize(w);
    }
  }

  EventStream take() { return std::move(stream_); }

 private:
  void shift_back(std::size_t i) {
    auto& ts = stream_.timestamps_ps;
    std::int64_t t = ts[i];
    EventOrigin o{};
    std::uint64_t p{};
    if (tag_) {
      o = stream_.origins[i];
      p = stream_.pair_ids[i];
    }
    std::size_t j = i;
    while (j > 0 && ts[j - 1] > t) {
      ts[j] = ts[j - 1];
      if (tag_) {
        stream_.origins[j] = stream_.origins[j - 1];
        stream_.pair_ids[j] = stream_.pair_ids[j - 1];
      }
      --j;
    }
    ts[j] = t;
    if (tag_) {
      stream_.origins[j] = o;
      stream_.pair_ids[j] = p;
    }
  }

  EventStream stream_;
  bool tag_ = false;
};

// Poisson arrivals over [start_s, stop_s) at the given rate; calls
// emit(absolute time in seconds) in time order.
template <typename Emit>
void poisson_arrivals(std::mt19937_64& rng, double rate_hz, double start_s,
                      double stop_s, Emit&& emit) {
  if (rate_hz <= 0.0) return;
  std::exponential_distribution<double> gap(rate_hz);
  double t = start_s + gap(rng);
  while (t < stop_s) {
    emit(t);
    t += gap(rng);
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream_id,
                          std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream_id) ^ index);
}

double drift_offset_ps(const DriftModel& model, double t_ps) {
  if (t_ps < 0.0) {
    throw std::invalid_argument("drift_offset: t must be >= 0");
  }
  switch (model.kind) {
    case DriftModel::Kind::none:
      return 0.0;
    case DriftModel::Kind::linear:
      return model.magnitude_ps_per_hour * (t_ps / kPsPerHour);
    case DriftModel::Kind::random_walk: {
      const double chunk_ps = kGenerationChunkSeconds * kPsPerSecond;
      const auto k = static_cast<std::int64_t>(t_ps / chunk_ps);
      const DriftSegment seg = drift_segment(model, k);
      return seg.at(t_ps, k * chunk_ps);
    }
  }
  return 0.0;
}

double perturb_phase(const PhaseNoiseModel& model, double theta_nominal,
                     double t_ps, std::uint64_t seed) {
  if (t_ps < 0.0) {
    throw std::invalid_argument("perturb_phase: t must be >= 0");
  }
  const double calib_ps = model.calibration_interval_hours * kPsPerHour;
  const auto interval = static_cast<std::uint64_t>(t_ps / calib_ps);
  double setting_error = 0.0;
  const double sigma = model.setting_sigma_rad();
  if (sigma > 0.0) {
    std::mt19937_64 rng(derive_seed(seed, 0, interval));
    std::normal_distribution<double> gauss(0.0, sigma);
    setting_error = gauss(rng);
  }
  const double since_calibration = t_ps - interval * calib_ps;
  return theta_nominal + setting_error +
         model.pump_drift_rad_per_hour * (since_calibration / kPsPerHour);
}

GeneratedRun generate_streams(const ValidatedScenario& scenario,
                              double theta_s, double theta_i,
                              double duration_s, std::uint64_t seed,
                              const GenerationOptions& options) {
  return generate_streams_between(scenario, theta_s, theta_i, 0.0, duration_s,
                                  seed, options);
}

GeneratedRun generate_streams_between(const ValidatedScenario& scenario,
                                      double theta_s, double theta_i,
                                      double start_s, double stop_s,
                                      std::uint64_t seed,
                                      const GenerationOptions& options) {
  const auto& s = *scenario;
  if (stop_s <= start_s) {
    throw std::invalid_argument("generate_streams: empty time range");
  }
  const double chunks_from = start_s / kGenerationChunkSeconds;
  if (std::abs(chunks_from - std::llround(chunks_from)) > 1e-9) {
    throw std::invalid_argument(
        "generate_streams: start must fall on a generation chunk boundary");
  }

  const double rep = s.source.rep_rate_hz();
  const double eta_s_arm = arm_efficiency(s.channel_s, s.detector_s);
  const double eta_i_arm = arm_efficiency(s.channel_i, s.detector_i);
  if (s.source.mu * eta_s_arm > 1.0 || s.source.mu * eta_i_arm > 1.0) {
    throw std::domain_error(
        "generate_streams: mu*eta exceeds one event per slot, outside the "
        "sparse-occupancy model");
  }

  const bool analyzers = s.analyzers_present();
  const double interval = s.source.pulse_interval_ps;
  const double envelope_sigma = fwhm_to_sigma(s.source.pulse_width_ps);
  const double v0 = s.source.intrinsic_visibility;
  const std::int64_t delay_s_ps =
      analyzers ? std::llround(s.mzi_s->delay_time_ps) : 0;
  const std::int64_t delay_i_ps =
      analyzers ? std::llround(s.mzi_i->delay_time_ps) : 0;

  const double singles_rate_s =
      rep * s.source.mu * eta_s_arm * (analyzers ? 0.5 : 1.0);
  const double singles_rate_i =
      rep * s.source.mu * eta_i_arm * (analyzers ? 0.5 : 1.0);
  const double pair_base_hz = rep * s.source.mu * eta_s_arm * eta_i_arm;

  const double duration = stop_s - start_s;
  const auto reserve_s = static_cast<std::size_t>(
      (singles_rate_s + s.detector_s.dark_rate_hz + 1.0) * duration * 1.05 +
      64);
  const auto reserve_i = static_cast<std::size_t>(
      (singles_rate_i + s.detector_i.dark_rate_hz + 1.0) * duration * 1.05 +
      64);

  StreamBuilder signal(Channel::signal, options.tag_origins, reserve_s);
  StreamBuilder idler(Channel::idler, options.tag_origins, reserve_i);
  RunStats stats;

  const auto first_chunk =
      static_cast<std::int64_t>(std::llround(chunks_from));
  const auto last_chunk = static_cast<std::int64_t>(
      std::ceil(stop_s / kGenerationChunkSeconds - 1e-9));

  std::uint64_t next_pair_id = 0;
  std::vector<RawEvent> pair_sig, pair_idl, single_buf, dark_buf, merged,
      merge_tmp;

  for (std::int64_t chunk = first_chunk; chunk < last_chunk; ++chunk) {
    const double c_start_s = chunk * kGenerationChunkSeconds;
    const double c_stop_s =
        std::min((chunk + 1) * kGenerationChunkSeconds, stop_s);
    const double c_start_ps = c_start_s * kPsPerSecond;

    // Phases and drift are evaluated once per chunk; both vary slowly
    // compared with the chunk length.
    double th_s = theta_s;
    double th_i = theta_i;
    if (analyzers) {
      th_s = perturb_phase(s.phase_noise, theta_s, c_start_ps,
                           derive_seed(seed, kStreamPhaseS, 0));
      th_i = perturb_phase(s.phase_noise, theta_i, c_start_ps,
                           derive_seed(seed, kStreamPhaseI, 0));
    }
    const DriftSegment drift = drift_segment(s.drift, chunk);

    ChunkRates rates;
    if (analyzers) {
      const FransonWeights w = franson_peak_weights(th_s + th_i, v0);
      rates.pair_total_hz = pair_base_hz * w.total();
      rates.central_fraction = w.total() > 0.0 ? w.central / w.total() : 0.0;
    } else {
      rates.pair_total_hz = pair_base_hz;
      rates.central_fraction = 1.0;
    }
    rates.singles_s_hz = singles_rate_s;
    rates.singles_i_hz = singles_rate_i;

    const auto uchunk = static_cast<std::uint64_t>(chunk);

    // Coincident pairs.
    pair_sig.clear();
    pair_idl.clear();
    {
      std::mt19937_64 rng(derive_seed(seed, kStreamPairs, uchunk));
      std::normal_distribution<double> gauss;
      std::uniform_real_distribution<double> uni(0.0, 1.0);
      poisson_arrivals(rng, rates.pair_total_hz, c_start_s, c_stop_s,
                       [&](double t_s) {
        const double t_ps = t_s * kPsPerSecond;
        const auto slot = std::llround(t_ps / interval);
        const auto base =
            static_cast<std::int64_t>(std::llround(slot * interval));
        const double envelope = gauss(rng) * envelope_sigma;
        const double jit_s = gauss(rng) * s.detector_s.jitter_sigma_ps;
        const double jit_i = gauss(rng) * s.detector_i.jitter_sigma_ps;
        std::int64_t extra_s = 0;
        std::int64_t extra_i = 0;
        std::uint64_t pid = kNoPairId;
        const double u = uni(rng);
        if (u < rates.central_fraction) {
          // Central peak: both photons assigned the earlier slot.
          pid = next_pair_id++;
          ++stats.pairs_central;
        } else if (u < rates.central_fraction +
                           (1.0 - rates.central_fraction) / 2.0) {
          extra_i = delay_i_ps;  // signal short, idler long
          ++stats.pairs_side;
        } else {
          extra_s = delay_s_ps;  // signal long, idler short
          ++stats.pairs_side;
        }
        const double d = drift.at(static_cast<double>(base), c_start_ps);
        pair_sig.push_back({base + extra_s +
                                std::llround(envelope + jit_s),
                            EventOrigin::pair, pid});
        pair_idl.push_back({base + extra_i +
                                std::llround(envelope + jit_i + d),
                            EventOrigin::pair, pid});
      });
    }

    // Unpaired singles and darks, then merge per channel.
    auto build_channel = [&](StreamBuilder& builder, Channel channel,
                             std::vector<RawEvent>& pairs) {
      const bool is_signal = channel == Channel::signal;
      const double singles_hz =
          is_signal ? rates.singles_s_hz : rates.singles_i_hz;
      const double dark_hz = is_signal ? s.detector_s.dark_rate_hz
                                       : s.detector_i.dark_rate_hz;
      const double jitter = is_signal ? s.detector_s.jitter_sigma_ps
                                      : s.detector_i.jitter_sigma_ps;
      const std::int64_t delay = is_signal ? delay_s_ps : delay_i_ps;

      single_buf.clear();
      {
        std::mt19937_64 rng(derive_seed(
            seed, is_signal ? kStreamSinglesS : kStreamSinglesI, uchunk));
        std::normal_distribution<double> gauss;
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        poisson_arrivals(rng, singles_hz, c_start_s, c_stop_s,
                         [&](double t_s) {
          const double t_ps = t_s * kPsPerSecond;
          const auto slot = std::llround(t_ps / interval);
          const auto base =
              static_cast<std::int64_t>(std::llround(slot * interval));
          const std::int64_t extra =
              (analyzers && uni(rng) < 0.5) ? delay : 0;
          double offset = gauss(rng) * envelope_sigma + gauss(rng) * jitter;
          if (!is_signal) {
            offset += drift.at(static_cast<double>(base), c_start_ps);
          }
          single_buf.push_back(
              {base + extra + std::llround(offset), EventOrigin::single,
               kNoPairId});
          if (is_signal) {
            ++stats.singles_s;
          } else {
            ++stats.singles_i;
          }
        });
      }

      dark_buf.clear();
      {
        std::mt19937_64 rng(derive_seed(
            seed, is_signal ? kStreamDarksS : kStreamDarksI, uchunk));
        poisson_arrivals(rng, dark_hz, c_start_s, c_stop_s, [&](double t_s) {
          dark_buf.push_back({std::llround(t_s * kPsPerSecond),
                              EventOrigin::dark, kNoPairId});
          if (is_signal) {
            ++stats.darks_s;
          } else {
            ++stats.darks_i;
          }
        });
      }

      fix_near_sorted(pairs);
      fix_near_sorted(single_buf);

      merge_tmp.clear();
      std::merge(pairs.begin(), pairs.end(), single_buf.begin(),
                 single_buf.end(), std::back_inserter(merge_tmp), raw_less);
      merged.clear();
      std::merge(merge_tmp.begin(), merge_tmp.end(), dark_buf.begin(),
                 dark_buf.end(), std::back_inserter(merged), raw_less);
      builder.append_merged_chunk(merged);
    };

    build_channel(signal, Channel::signal, pair_sig);
    build_channel(idler, Channel::idler, pair_idl);
  }

  signal.fix_boundaries();
  idler.fix_boundaries();

  std::unordered_set<std::uint64_t> kept_signal;
  std::unordered_set<std::uint64_t> kept_idler;
  signal.apply_dead_time(s.detector_s.dead_time_ps,
                         options.tag_origins ? &kept_signal : nullptr);
  idler.apply_dead_time(s.detector_i.dead_time_ps,
                        options.tag_origins ? &kept_idler : nullptr);

  if (options.tag_origins) {
    for (std::uint64_t id : kept_idler) {
      if (kept_signal.count(id)) ++stats.surviving_central_pairs;
    }
  }

  GeneratedRun run;
  run.signal = signal.take();
  run.idler = idler.take();
  run.stats = stats;
  return run;
}

}  // namespace tbsim
