#include "evsplat/event_sim.hpp"

#include <algorithm>
#include <cmath>

namespace evsplat {

EventSimulator::EventSimulator(int width, int height, double delta)
    : width_(width), height_(height), delta_(delta) {
  if (width_ <= 0 || height_ <= 0) throw ContractViolation("event sim: bad geometry");
  if (!(delta_ > 0.0)) throw ContractViolation("event sim: contrast threshold must be positive");
  ref_.assign(static_cast<std::size_t>(width_) * height_, 0.0);
}

void EventSimulator::feed(std::uint64_t t_us, const Image& log_mosaic) {
  if (log_mosaic.width != width_ || log_mosaic.height != height_ || log_mosaic.channels != 1)
    throw ContractViolation("event sim: frame shape mismatch");
  if (primed_ && t_us <= t_prev_)
    throw ContractViolation("event sim: frame timestamps must strictly increase");

  if (!primed_) {
    std::copy(log_mosaic.data.begin(), log_mosaic.data.end(), ref_.begin());
    primed_ = true;
    t_prev_ = t_us;
    return;
  }

  const double span = static_cast<double>(t_us - t_prev_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) {
      const std::size_t px = static_cast<std::size_t>(y) * width_ + x;
      const double level = log_mosaic.data[px];
      const double diff = level - ref_[px];
      const double mag = std::abs(diff);
      if (mag < delta_) continue;
      const auto n = static_cast<std::uint64_t>(mag / delta_);
      const std::int8_t pol = diff > 0.0 ? 1 : -1;
      for (std::uint64_t j = 1; j <= n; ++j) {
        // linear interpolation of the crossing inside the frame interval
        const double frac = (static_cast<double>(j) * delta_) / mag;
        std::uint64_t t_ev = t_prev_ + static_cast<std::uint64_t>(std::llround(span * frac));
        t_ev = std::clamp<std::uint64_t>(t_ev, t_prev_ + 1, t_us);
        events_.push_back({t_ev, static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), pol});
      }
      ref_[px] += pol * static_cast<double>(n) * delta_;
    }
  t_prev_ = t_us;
}

std::vector<Event> EventSimulator::take_events() {
  std::stable_sort(events_.begin(), events_.end(),
                   [](const Event& a, const Event& b) { return a.t_us < b.t_us; });
  std::vector<Event> out;
  out.swap(events_);
  return out;
}

std::vector<Event> simulate_events(const std::vector<std::uint64_t>& times_us,
                                   const std::vector<Image>& log_mosaics, double delta) {
  if (times_us.size() != log_mosaics.size())
    throw ContractViolation("simulate_events: times and frames disagree in length");
  if (log_mosaics.empty()) return {};
  EventSimulator sim(log_mosaics[0].width, log_mosaics[0].height, delta);
  for (std::size_t i = 0; i < times_us.size(); ++i) sim.feed(times_us[i], log_mosaics[i]);
  return sim.take_events();
}

}  // namespace evsplat
