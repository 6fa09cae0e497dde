#include "evsplat/events.hpp"

#include "binio.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>
#include <sstream>

namespace evsplat {

Image EventFrame::values() const {
  Image img = Image::zeros(width, height, 1);
  for (std::size_t i = 0; i < polarity_sum.size(); ++i) img.data[i] = delta * polarity_sum[i];
  return img;
}

EventFrame EventFrame::add(const EventFrame& next) const {
  if (width != next.width || height != next.height || delta != next.delta)
    throw ContractViolation("event frames: geometry or delta mismatch in add");
  if (t_end_us != next.t_start_us)
    throw ContractViolation("event frames: add needs adjacent windows");
  EventFrame out = *this;
  out.t_end_us = next.t_end_us;
  for (std::size_t i = 0; i < polarity_sum.size(); ++i) {
    out.polarity_sum[i] += next.polarity_sum[i];
    out.counts[i] += next.counts[i];
  }
  return out;
}

EventStore::EventStore(std::vector<Event> events, int width, int height, double delta)
    : events_(std::move(events)), width_(width), height_(height), delta_(delta) {
  if (width_ <= 0 || height_ <= 0) throw ContractViolation("event store: bad geometry");
  if (!(delta_ > 0.0)) throw ContractViolation("event store: contrast threshold must be positive");
  std::stable_sort(events_.begin(), events_.end(),
                   [](const Event& a, const Event& b) { return a.t_us < b.t_us; });
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const Event& e = events_[i];
    if (e.x >= width_ || e.y >= height_) {
      std::ostringstream err;
      err << "event " << i << ": pixel (" << e.x << "," << e.y << ") outside " << width_ << "x"
          << height_;
      throw ContractViolation(err.str());
    }
    if (e.polarity != 1 && e.polarity != -1) {
      std::ostringstream err;
      err << "event " << i << ": polarity must be +1 or -1, got " << static_cast<int>(e.polarity);
      throw ContractViolation(err.str());
    }
  }
  build_checkpoints();
}

std::uint64_t EventStore::first_time_us() const {
  if (empty()) throw ContractViolation("event store: empty stream has no first time");
  return events_.front().t_us;
}

std::uint64_t EventStore::last_time_us() const {
  if (empty()) throw ContractViolation("event store: empty stream has no last time");
  return events_.back().t_us;
}

void EventStore::build_checkpoints() {
  const std::size_t n_px = static_cast<std::size_t>(width_) * height_;
  const std::size_t n_ckpt = events_.size() / kCheckpointInterval + 1;
  ckpt_sums_.assign(n_ckpt, {});
  ckpt_counts_.assign(n_ckpt, {});
  std::vector<std::int32_t> sums(n_px, 0);
  std::vector<std::uint32_t> counts(n_px, 0);
  ckpt_sums_[0] = sums;
  ckpt_counts_[0] = counts;
  for (std::size_t k = 1; k < n_ckpt; ++k) {
    const std::size_t begin = (k - 1) * kCheckpointInterval;
    const std::size_t end = k * kCheckpointInterval;
    for (std::size_t i = begin; i < end; ++i) {
      const Event& e = events_[i];
      const std::size_t px = static_cast<std::size_t>(e.y) * width_ + e.x;
      sums[px] += e.polarity;
      counts[px] += 1;
    }
    ckpt_sums_[k] = sums;
    ckpt_counts_[k] = counts;
  }
}

std::size_t EventStore::upper_bound_index(std::uint64_t t_us) const {
  auto it = std::upper_bound(events_.begin(), events_.end(), t_us,
                             [](std::uint64_t t, const Event& e) { return t < e.t_us; });
  return static_cast<std::size_t>(it - events_.begin());
}

EventFrame EventStore::accumulate(std::uint64_t t_start_us, std::uint64_t t_end_us) const {
  if (t_start_us > t_end_us)
    throw ContractViolation("accumulate: window start must not exceed its end");
  EventFrame frame;
  frame.t_start_us = t_start_us;
  frame.t_end_us = t_end_us;
  frame.width = width_;
  frame.height = height_;
  frame.delta = delta_;
  const std::size_t n_px = static_cast<std::size_t>(width_) * height_;

  const std::size_t i1 = upper_bound_index(t_start_us);
  const std::size_t i2 = upper_bound_index(t_end_us);

  auto add_range = [&](std::size_t begin, std::size_t end, bool subtract) {
    for (std::size_t i = begin; i < end; ++i) {
      const Event& e = events_[i];
      const std::size_t px = static_cast<std::size_t>(e.y) * width_ + e.x;
      if (subtract) {
        frame.polarity_sum[px] -= e.polarity;
        frame.counts[px] -= 1;
      } else {
        frame.polarity_sum[px] += e.polarity;
        frame.counts[px] += 1;
      }
    }
  };

  const std::size_t k1 = i1 / kCheckpointInterval;
  const std::size_t k2 = i2 / kCheckpointInterval;
  if (k1 == k2) {
    frame.polarity_sum.assign(n_px, 0);
    frame.counts.assign(n_px, 0);
    add_range(i1, i2, false);
  } else {
    frame.polarity_sum = ckpt_sums_[k2];
    frame.counts = ckpt_counts_[k2];
    for (std::size_t px = 0; px < n_px; ++px) {
      frame.polarity_sum[px] -= ckpt_sums_[k1][px];
      frame.counts[px] -= ckpt_counts_[k1][px];
    }
    add_range(k1 * kCheckpointInterval, i1, true);
    add_range(k2 * kCheckpointInterval, i2, false);
  }
  return frame;
}

std::uint64_t EventStore::count_in_window(std::uint64_t t_start_us, std::uint64_t t_end_us) const {
  if (t_start_us > t_end_us)
    throw ContractViolation("count_in_window: window start must not exceed its end");
  return upper_bound_index(t_end_us) - upper_bound_index(t_start_us);
}

WindowResult EventStore::adaptive_window(std::uint64_t t_end_us,
                                         std::uint64_t target_count) const {
  if (target_count == 0) throw ContractViolation("adaptive_window: target must be positive");
  WindowResult out;
  const std::size_t j = upper_bound_index(t_end_us);
  if (j < target_count) {
    // not enough history: take everything available before t_end
    out.saturated = true;
    out.count = j;
    if (j == 0)
      out.t_start_us = t_end_us == 0 ? 0 : t_end_us - 1;
    else
      out.t_start_us = events_.front().t_us == 0 ? 0 : events_.front().t_us - 1;
    return out;
  }
  // earliest event that must be inside the window sits at index j - target.
  // Starting just before its timestamp keeps it in the half-open window and
  // excludes nothing newer; duplicates of that timestamp may push the count
  // above target, which is still the smallest achievable count >= target.
  const std::uint64_t t_edge = events_[j - target_count].t_us;
  out.t_start_us = t_edge == 0 ? 0 : t_edge - 1;
  out.count = j - upper_bound_index(out.t_start_us);
  out.saturated = false;
  return out;
}

DualWindows sample_dual_windows(const EventStore& store, std::uint64_t t_end_us,
                                std::uint64_t n_max, std::mt19937_64& rng) {
  if (n_max < 300)
    throw ContractViolation("sample_dual_windows: n_max must be at least 300");
  std::uniform_int_distribution<std::uint64_t> long_dist(n_max / 10, n_max);
  std::uniform_int_distribution<std::uint64_t> short_dist(n_max / 300, n_max / 30);
  const std::uint64_t long_target = std::max<std::uint64_t>(1, long_dist(rng));
  const std::uint64_t short_target = std::max<std::uint64_t>(1, short_dist(rng));
  DualWindows out;
  out.long_window = store.adaptive_window(t_end_us, long_target);
  out.short_window = store.adaptive_window(t_end_us, short_target);
  return out;
}

Image BayerMask::apply(const Image& rgb) {
  if (rgb.channels != 3) throw ContractViolation("bayer: need a 3-channel image");
  Image out = Image::zeros(rgb.width, rgb.height, 3);
  for (int y = 0; y < rgb.height; ++y)
    for (int x = 0; x < rgb.width; ++x) {
      const int c = channel_at(x, y);
      out.at(x, y, c) = rgb.at(x, y, c);
    }
  return out;
}

Image BayerMask::mosaic(const Image& rgb) {
  if (rgb.channels != 3) throw ContractViolation("bayer: need a 3-channel image");
  Image out = Image::zeros(rgb.width, rgb.height, 1);
  for (int y = 0; y < rgb.height; ++y)
    for (int x = 0; x < rgb.width; ++x) out.at(x, y, 0) = rgb.at(x, y, channel_at(x, y));
  return out;
}

namespace {
constexpr char kEventsMagic[] = "evsplat-events 1";
}

void write_events(const std::string& path, const EventStore& store) {
  const std::string tmp = path + ".tmp";
  std::ofstream os(tmp, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << kEventsMagic << "\n";
  os << "width " << store.width() << "\n";
  os << "height " << store.height() << "\n";
  os << "delta " << std::setprecision(17) << store.delta() << "\n";
  os << "count " << store.size() << "\n";
  os << "end_header\n";
  for (const Event& e : store.events()) {
    binio::write_le<std::uint64_t>(os, e.t_us);
    binio::write_le<std::uint16_t>(os, e.x);
    binio::write_le<std::uint16_t>(os, e.y);
    binio::write_le<std::int8_t>(os, e.polarity);
  }
  if (!os) throw IoError("write failed for " + path);
  os.close();
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("rename " + tmp + ": " + ec.message());
}

EventStore read_events(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::string line;
  if (!std::getline(is, line) || line != kEventsMagic)
    throw IoError(path + ": not an event stream file");
  int width = 0, height = 0;
  double delta = 0.0;
  std::uint64_t count = 0;
  bool header_done = false;
  while (std::getline(is, line)) {
    if (line == "end_header") {
      header_done = true;
      break;
    }
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "width") ls >> width;
    else if (key == "height") ls >> height;
    else if (key == "delta") ls >> delta;
    else if (key == "count") ls >> count;
    else throw IoError(path + ": unknown header field '" + key + "'");
    if (!ls) throw IoError(path + ": malformed header line '" + line + "'");
  }
  if (!header_done) throw IoError(path + ": missing end_header");
  std::vector<Event> events(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    events[i].t_us = binio::read_le<std::uint64_t>(is, "event timestamp");
    events[i].x = binio::read_le<std::uint16_t>(is, "event x");
    events[i].y = binio::read_le<std::uint16_t>(is, "event y");
    events[i].polarity = binio::read_le<std::int8_t>(is, "event polarity");
  }
  for (std::uint64_t i = 1; i < count; ++i)
    if (events[i].t_us < events[i - 1].t_us)
      throw IoError(path + ": timestamps not sorted");
  return EventStore(std::move(events), width, height, delta);
}

}  // namespace evsplat
