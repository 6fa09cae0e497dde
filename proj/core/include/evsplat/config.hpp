#pragma once

#include "evsplat/camera.hpp"
#include "evsplat/trainer.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace evsplat {

// Flat key/value store parsed from an INI-style file: [section] headers
// prefix the keys that follow ("section.key"), full-line comments start with
// '#' or ';'. Typed getters mark keys consumed so callers can reject typos
// with reject_unconsumed() once every schema has had its pass.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<config>");

  // dotted key, e.g. "train.seed"; later sets win
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  std::int64_t require_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  // throws ContractViolation naming every key no getter has touched
  void reject_unconsumed() const;

  // keys no getter has touched yet, in map order
  std::vector<std::string> unconsumed() const;

  const std::map<std::string, std::string>& entries() const { return values_; }
  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, std::string> values_;
  std::string origin_ = "<config>";
  mutable std::set<std::string> consumed_;

  const std::string* find(const std::string& key) const;
};

// camera.{width,height,fx,fy,cx,cy,z_near,z_far}, all required
CameraModel camera_from_config(const Config& config);

// train.* keys over TrainConfig defaults
TrainConfig train_config_from_config(const Config& config);

}  // namespace evsplat
