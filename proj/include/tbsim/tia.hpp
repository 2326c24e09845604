#pragma once

#include <cstdint>
#include <vector>

#include "tbsim/montecarlo.hpp"
#include "tbsim/scenario.hpp"

namespace tbsim {

/// Start-stop delay histogram at the analyzer resolution. Bin i covers
/// [origin + i*w, origin + (i+1)*w).
struct CoincidenceHistogram {
  double bin_width_ps = 9.8;
  double origin_ps = 0.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t total_starts = 0;
  std::uint64_t total_stops = 0;

  std::size_t bins() const { return counts.size(); }
  double span_ps() const { return counts.size() * bin_width_ps; }
  double bin_center(std::size_t i) const {
    return origin_ps + (static_cast<double>(i) + 0.5) * bin_width_ps;
  }
  std::uint64_t total() const;
};

/// Histograms every (start, stop) delay falling inside the analyzer range
/// (centered on zero). Two-pointer sweep over the sorted streams; all stops
/// per start are counted. Unsorted input is rejected.
CoincidenceHistogram correlate(const EventStream& starts,
                               const EventStream& stops,
                               const TiaParams& tia);

/// Sum of bins whose centers lie inside [center - window/2, center +
/// window/2]. The window must lie inside the histogram span.
std::uint64_t windowed_count(const CoincidenceHistogram& h, double center_ps,
                             double window_ps);

/// Peak delay after +-3 bin boxcar smoothing; ties resolve toward
/// reference_delay_ps, then toward the lower bin.
double smoothed_peak_delay(const CoincidenceHistogram& h,
                           double reference_delay_ps);

struct PeakTrack {
  struct Entry {
    double chunk_start_s = 0.0;
    double peak_delay_ps = 0.0;
    std::uint64_t window_counts = 0;
  };
  std::vector<Entry> entries;
  double window_ps = 0.0;
  std::uint64_t total = 0;  // drift-corrected windowed sum over chunks
  double final_center_ps = 0.0;  // hand this to the next segment's track
};

/// Splits the run into chunks of tia.chunk_duration_s, locates the
/// coincidence peak per chunk within a neighborhood of the previous center,
/// and counts within a window recentered on it. Chunks without candidates
/// inherit the previous center and contribute no counts. initial_center_ps
/// seeds the trace; campaigns spanning several runs should pass the
/// previous segment's final_center_ps.
PeakTrack track_peak(const EventStream& starts, const EventStream& stops,
                     const TiaParams& tia, double initial_center_ps = 0.0);

}  // namespace tbsim
