#pragma once

#include "evsplat/image.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace evsplat {

// One brightness-change event. Timestamps are integer microseconds so window
// arithmetic is exact. Polarity is +1 or -1.
struct Event {
  std::uint64_t t_us = 0;
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::int8_t polarity = 0;
};

// Accumulated polarity sums over a half-open time window (t_start, t_end].
// Integer sums are the source of truth; values are delta * sum, which makes
// frame addition exact: adding two adjacent windows' frames bit-matches
// accumulating the union window.
struct EventFrame {
  std::uint64_t t_start_us = 0;
  std::uint64_t t_end_us = 0;
  int width = 0;
  int height = 0;
  double delta = 0.0;
  std::vector<std::int32_t> polarity_sum;  // row-major
  std::vector<std::uint32_t> counts;       // row-major

  std::int32_t sum_at(int x, int y) const {
    return polarity_sum[static_cast<std::size_t>(y) * width + x];
  }
  std::uint32_t count_at(int x, int y) const {
    return counts[static_cast<std::size_t>(y) * width + x];
  }
  double value_at(int x, int y) const { return delta * sum_at(x, y); }

  Image values() const;  // H x W x 1 of delta * polarity_sum

  // adjacent windows only (this.t_end == next.t_start)
  EventFrame add(const EventFrame& next) const;
};

struct WindowResult {
  std::uint64_t t_start_us = 0;
  std::uint64_t count = 0;
  bool saturated = false;  // fewer events available than requested
};

// Time-sorted event stream with periodic per-pixel prefix checkpoints so a
// window accumulation costs O(pixels + events between checkpoints) instead
// of a full scan.
class EventStore {
 public:
  EventStore() = default;
  // events need not be sorted; a stable sort by timestamp is applied
  EventStore(std::vector<Event> events, int width, int height, double delta);

  int width() const { return width_; }
  int height() const { return height_; }
  double delta() const { return delta_; }
  std::size_t size() const { return events_.size(); }
  bool empty() const { return events_.empty(); }
  const std::vector<Event>& events() const { return events_; }
  std::uint64_t first_time_us() const;
  std::uint64_t last_time_us() const;

  // events with t in (t_start, t_end]; t_start <= t_end required
  EventFrame accumulate(std::uint64_t t_start_us, std::uint64_t t_end_us) const;

  // number of events with t in (t_start, t_end]
  std::uint64_t count_in_window(std::uint64_t t_start_us, std::uint64_t t_end_us) const;

  // Largest t_start such that (t_start, t_end] holds at least target_count
  // events, i.e. the smallest achievable window with count >= target. If the
  // whole prefix holds fewer events the window covers everything available
  // and `saturated` is set.
  WindowResult adaptive_window(std::uint64_t t_end_us, std::uint64_t target_count) const;

 private:
  std::vector<Event> events_;
  int width_ = 0;
  int height_ = 0;
  double delta_ = 0.0;

  // checkpoint k holds per-pixel prefix sums over events [0, k * interval)
  static constexpr std::size_t kCheckpointInterval = 1 << 16;
  std::vector<std::vector<std::int32_t>> ckpt_sums_;
  std::vector<std::vector<std::uint32_t>> ckpt_counts_;

  std::size_t upper_bound_index(std::uint64_t t_us) const;
  void build_checkpoints();
};

struct DualWindows {
  WindowResult long_window;
  WindowResult short_window;
};

// Targets drawn uniformly from [n_max/10, n_max] and [n_max/300, n_max/30]
// (integer division bounds), then resolved with adaptive_window. n_max must
// be at least 300 so both ranges are non-empty.
DualWindows sample_dual_windows(const EventStore& store, std::uint64_t t_end_us,
                                std::uint64_t n_max, std::mt19937_64& rng);

// RGGB mosaic: even rows alternate R,G; odd rows alternate G,B.
struct BayerMask {
  // 0 = red, 1 = green, 2 = blue
  static int channel_at(int x, int y) {
    if ((y & 1) == 0) return (x & 1) == 0 ? 0 : 1;
    return (x & 1) == 0 ? 1 : 2;
  }
  // keeps each pixel's mosaic channel, zeroes the other two
  static Image apply(const Image& rgb);
  // single-channel mosaic of an RGB image
  static Image mosaic(const Image& rgb);
};

// text header + packed little-endian records; see docs/file_formats.md
void write_events(const std::string& path, const EventStore& store);
EventStore read_events(const std::string& path);

}  // namespace evsplat
