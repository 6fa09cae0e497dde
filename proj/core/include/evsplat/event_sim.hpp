#pragma once

#include "evsplat/events.hpp"

namespace evsplat {

// Ideal event camera fed with log-intensity mosaic frames. Each pixel keeps
// the log intensity at which it last fired; when a new frame moves the
// signal by at least the contrast threshold, one event per full threshold
// crossing is emitted, timed by linear interpolation inside the frame
// interval. The sub-threshold remainder stays pending, so slow drifts still
// fire eventually.
class EventSimulator {
 public:
  EventSimulator(int width, int height, double delta);

  // frames must arrive with strictly increasing timestamps; the first frame
  // only sets the per-pixel reference levels
  void feed(std::uint64_t t_us, const Image& log_mosaic);

  std::size_t pending_count() const { return events_.size(); }

  // time-sorted stream of everything emitted so far; resets the buffer
  std::vector<Event> take_events();

 private:
  int width_;
  int height_;
  double delta_;
  bool primed_ = false;
  std::uint64_t t_prev_ = 0;
  std::vector<double> ref_;
  std::vector<Event> events_;
};

// convenience wrapper: simulate over a whole frame sequence at once
std::vector<Event> simulate_events(const std::vector<std::uint64_t>& times_us,
                                   const std::vector<Image>& log_mosaics, double delta);

}  // namespace evsplat
