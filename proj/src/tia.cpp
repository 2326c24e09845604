#include "tbsim/tia.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>

namespace tbsim {

namespace {

void require_sorted(const std::vector<std::int64_t>& ts, const char* what) {
  if (!std::is_sorted(ts.begin(), ts.end())) {
    throw std::invalid_argument(std::string("correlate: ") + what +
                                " stream is not time-ordered");
  }
}

CoincidenceHistogram correlate_span(std::span<const std::int64_t> starts,
                                    std::span<const std::int64_t> stops,
                                    const TiaParams& tia,
                                    std::uint64_t total_starts,
                                    std::uint64_t total_stops) {
  CoincidenceHistogram h;
  h.bin_width_ps = tia.resolution_ps;
  const double half = tia.histogram_range_ps / 2.0;
  h.origin_ps = -half;
  const auto nbins = static_cast<std::size_t>(
      std::ceil(tia.histogram_range_ps / tia.resolution_ps));
  h.counts.assign(nbins, 0);
  h.total_starts = total_starts;
  h.total_stops = total_stops;

  const double span = nbins * tia.resolution_ps;
  std::size_t lo = 0;
  for (const std::int64_t start : starts) {
    const double lo_edge = static_cast<double>(start) + h.origin_ps;
    while (lo < stops.size() && static_cast<double>(stops[lo]) < lo_edge) {
      ++lo;
    }
    for (std::size_t j = lo; j < stops.size(); ++j) {
      const double delay = static_cast<double>(stops[j] - start);
      if (delay >= h.origin_ps + span) break;
      const auto bin =
          static_cast<std::size_t>((delay - h.origin_ps) / h.bin_width_ps);
      if (bin < nbins) ++h.counts[bin];
    }
  }
  return h;
}

}  // namespace

std::uint64_t CoincidenceHistogram::total() const {
  std::uint64_t sum = 0;
  for (const auto c : counts) sum += c;
  return sum;
}

CoincidenceHistogram correlate(const EventStream& starts,
                               const EventStream& stops,
                               const TiaParams& tia) {
  require_sorted(starts.timestamps_ps, "start");
  require_sorted(stops.timestamps_ps, "stop");
  return correlate_span(starts.timestamps_ps, stops.timestamps_ps, tia,
                        starts.size(), stops.size());
}

std::uint64_t windowed_count(const CoincidenceHistogram& h, double center_ps,
                             double window_ps) {
  if (window_ps < h.bin_width_ps) {
    throw std::invalid_argument("windowed_count: window below bin width");
  }
  const double lo = center_ps - window_ps / 2.0;
  const double hi = center_ps + window_ps / 2.0;
  if (lo < h.origin_ps - 0.5 * h.bin_width_ps ||
      hi > h.origin_ps + h.span_ps() + 0.5 * h.bin_width_ps) {
    throw std::invalid_argument(
        "windowed_count: window lies outside the histogram range");
  }
  // Bins count when their center falls inside the window.
  const double first_f = (lo - h.origin_ps) / h.bin_width_ps - 0.5;
  const double last_f = (hi - h.origin_ps) / h.bin_width_ps - 0.5;
  auto first = static_cast<std::int64_t>(std::ceil(first_f - 1e-9));
  auto last = static_cast<std::int64_t>(std::floor(last_f + 1e-9));
  first = std::max<std::int64_t>(first, 0);
  last = std::min<std::int64_t>(last,
                                static_cast<std::int64_t>(h.bins()) - 1);
  std::uint64_t sum = 0;
  for (std::int64_t i = first; i <= last; ++i) {
    sum += h.counts[static_cast<std::size_t>(i)];
  }
  return sum;
}

namespace {

struct PeakCandidate {
  std::int64_t bin = -1;
  std::uint64_t score = 0;  // boxcar-smoothed counts at the bin
};

// Boxcar-smoothed argmax over bins whose centers lie in [lo_ps, hi_ps].
// Ties resolve by raw bin count, then proximity to the reference, then the
// lower bin. Returns a negative bin on an empty search region.
PeakCandidate peak_candidate_in(const CoincidenceHistogram& h,
                                double reference_ps, double lo_ps,
                                double hi_ps) {
  const auto n = static_cast<std::int64_t>(h.bins());
  const auto ref_bin = static_cast<std::int64_t>(
      std::clamp((reference_ps - h.origin_ps) / h.bin_width_ps, 0.0,
                 std::max(0.0, static_cast<double>(n - 1))));
  std::int64_t best = -1;
  std::uint64_t best_score = 0;
  std::uint64_t best_raw = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double center = h.bin_center(static_cast<std::size_t>(i));
    if (center < lo_ps || center > hi_ps) continue;
    const std::uint64_t raw = h.counts[static_cast<std::size_t>(i)];
    std::uint64_t score = 0;
    for (std::int64_t j = std::max<std::int64_t>(0, i - 3);
         j <= std::min(n - 1, i + 3); ++j) {
      score += h.counts[static_cast<std::size_t>(j)];
    }
    if (score == 0) continue;
    bool take = false;
    if (best < 0 || score > best_score) {
      take = true;
    } else if (score == best_score) {
      if (raw > best_raw) {
        take = true;
      } else if (raw == best_raw &&
                 std::llabs(i - ref_bin) < std::llabs(best - ref_bin)) {
        take = true;
      }
    }
    if (take) {
      best = i;
      best_score = score;
      best_raw = raw;
    }
  }
  return {best, best_score};
}

}  // namespace

double smoothed_peak_delay(const CoincidenceHistogram& h,
                           double reference_delay_ps) {
  const auto best =
      peak_candidate_in(h, reference_delay_ps,
                        -std::numeric_limits<double>::infinity(),
                        std::numeric_limits<double>::infinity());
  if (best.bin < 0) return reference_delay_ps;
  return h.bin_center(static_cast<std::size_t>(best.bin));
}

PeakTrack track_peak(const EventStream& starts, const EventStream& stops,
                     const TiaParams& tia, double initial_center_ps) {
  require_sorted(starts.timestamps_ps, "start");
  require_sorted(stops.timestamps_ps, "stop");

  PeakTrack track;
  track.window_ps = tia.window_ps;
  track.final_center_ps = initial_center_ps;
  if (starts.size() == 0) return track;

  const double chunk_ps = tia.chunk_duration_s * kPsPerSecond;
  const double half = tia.histogram_range_ps / 2.0;
  const auto& st = starts.timestamps_ps;
  const auto& sp = stops.timestamps_ps;

  const auto first_chunk =
      static_cast<std::int64_t>(std::floor(st.front() / chunk_ps));
  const auto last_chunk =
      static_cast<std::int64_t>(std::floor(st.back() / chunk_ps));

  double prev_center = initial_center_ps;
  for (std::int64_t c = first_chunk; c <= last_chunk; ++c) {
    const double t0 = c * chunk_ps;
    const double t1 = (c + 1) * chunk_ps;
    const auto s_lo = std::lower_bound(st.begin(), st.end(),
                                       static_cast<std::int64_t>(t0));
    const auto s_hi = std::lower_bound(s_lo, st.end(),
                                       static_cast<std::int64_t>(t1));
    if (s_lo == s_hi) continue;  // no candidates; previous center carries
    const auto p_lo = std::lower_bound(
        sp.begin(), sp.end(), static_cast<std::int64_t>(t0 - half - chunk_ps));
    const auto p_hi = std::lower_bound(
        p_lo, sp.end(), static_cast<std::int64_t>(t1 + half + chunk_ps));

    CoincidenceHistogram h = correlate_span(
        {st.data() + (s_lo - st.begin()),
         static_cast<std::size_t>(s_hi - s_lo)},
        {sp.data() + (p_lo - sp.begin()),
         static_cast<std::size_t>(p_hi - p_lo)},
        tia, static_cast<std::uint64_t>(s_hi - s_lo),
        static_cast<std::uint64_t>(p_hi - p_lo));
    if (h.total() == 0) continue;

    // The peak moves slowly between chunks, so the search tracks a
    // neighborhood of the previous center; a lone event elsewhere (a side
    // peak, a stray accidental) must not yank the window away. Clustered
    // counts recenter fully, a single click drags the trace by at most an
    // eighth of the window.
    const auto best = peak_candidate_in(h, prev_center,
                                        prev_center - tia.window_ps,
                                        prev_center + tia.window_ps);
    if (best.bin < 0) continue;  // nothing near the trace; carry the center
    double center = h.bin_center(static_cast<std::size_t>(best.bin));
    if (best.score < 2) {
      const double step = tia.window_ps / 8.0;
      center = prev_center + std::clamp(center - prev_center, -step, step);
    }
    // Keep the window inside the histogram span.
    const double min_c = h.origin_ps + tia.window_ps / 2.0;
    const double max_c = h.origin_ps + h.span_ps() - tia.window_ps / 2.0;
    center = std::clamp(center, min_c, max_c);

    const std::uint64_t wc = windowed_count(h, center, tia.window_ps);
    track.entries.push_back({t0 / kPsPerSecond, center, wc});
    track.total += wc;
    prev_center = center;
  }
  track.final_center_ps = prev_center;
  return track;
}

}  // namespace tbsim
