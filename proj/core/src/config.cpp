#include "evsplat/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace evsplat {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config config;
  config.origin_ = origin;
  std::istringstream is(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw ContractViolation(origin + ":" + std::to_string(line_no) +
                                ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw ContractViolation(origin + ":" + std::to_string(line_no) + ": empty section name");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw ContractViolation(origin + ":" + std::to_string(line_no) +
                              ": expected key = value, got \"" + t + "\"");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty())
      throw ContractViolation(origin + ":" + std::to_string(line_no) + ": empty key");
    config.values_[section.empty() ? key : section + "." + key] = value;
  }
  return config;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config file " + path);
  std::ostringstream buffer;
  buffer << is.rdbuf();
  return parse_string(buffer.str(), path);
}

void Config::set(const std::string& key, const std::string& value) {
  const std::string k = trim(key);
  if (k.empty()) throw ContractViolation("config: empty key in override");
  values_[k] = trim(value);
}

const std::string* Config::find(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  consumed_.insert(key);
  return &it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

std::string Config::require_string(const std::string& key) const {
  const std::string* v = find(key);
  if (!v) throw ContractViolation(origin_ + ": missing required key \"" + key + "\"");
  return *v;
}

double Config::require_double(const std::string& key) const {
  const std::string raw = require_string(key);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(raw, &used);
  } catch (const std::exception&) {
    throw ContractViolation(origin_ + ": key \"" + key + "\" is not a number: \"" + raw + "\"");
  }
  if (used != raw.size())
    throw ContractViolation(origin_ + ": key \"" + key + "\" has trailing junk: \"" + raw + "\"");
  return value;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? require_double(key) : fallback;
}

std::int64_t Config::require_int(const std::string& key) const {
  const std::string raw = require_string(key);
  std::size_t used = 0;
  std::int64_t value = 0;
  try {
    value = std::stoll(raw, &used);
  } catch (const std::exception&) {
    throw ContractViolation(origin_ + ": key \"" + key + "\" is not an integer: \"" + raw +
                            "\"");
  }
  if (used != raw.size())
    throw ContractViolation(origin_ + ": key \"" + key + "\" has trailing junk: \"" + raw + "\"");
  return value;
}

std::int64_t Config::get_int(const std::string& key, std::int64_t fallback) const {
  return has(key) ? require_int(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::int64_t v = require_int(key);
  if (v < 0)
    throw ContractViolation(origin_ + ": key \"" + key + "\" must be non-negative");
  return static_cast<std::uint64_t>(v);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string raw = lower(require_string(key));
  if (raw == "1" || raw == "true" || raw == "yes" || raw == "on") return true;
  if (raw == "0" || raw == "false" || raw == "no" || raw == "off") return false;
  throw ContractViolation(origin_ + ": key \"" + key + "\" is not a boolean: \"" + raw + "\"");
}

std::vector<std::string> Config::unconsumed() const {
  std::vector<std::string> out;
  for (const auto& [key, value] : values_)
    if (consumed_.count(key) == 0) out.push_back(key);
  return out;
}

void Config::reject_unconsumed() const {
  const std::vector<std::string> keys = unconsumed();
  if (keys.empty()) return;
  std::string unknown;
  for (const std::string& k : keys) {
    if (!unknown.empty()) unknown += ", ";
    unknown += k;
  }
  throw ContractViolation(origin_ + ": unknown config keys: " + unknown);
}

CameraModel camera_from_config(const Config& config) {
  const CameraModel camera = CameraModel::make(
      static_cast<int>(config.require_int("camera.width")),
      static_cast<int>(config.require_int("camera.height")), config.require_double("camera.fx"),
      config.require_double("camera.fy"), config.require_double("camera.cx"),
      config.require_double("camera.cy"), config.require_double("camera.z_near"),
      config.require_double("camera.z_far"));
  return camera;
}

TrainConfig train_config_from_config(const Config& config) {
  TrainConfig c;
  c.total_iterations = config.get_int("train.total_iterations", c.total_iterations);
  c.densify_from = config.get_int("train.densify_from", c.densify_from);
  c.densify_interval = config.get_int("train.densify_interval", c.densify_interval);
  c.densify_until = config.get_int("train.densify_until", c.densify_until);
  c.densify_grad_start = config.get_double("train.densify_grad_start", c.densify_grad_start);
  c.densify_grad_end = config.get_double("train.densify_grad_end", c.densify_grad_end);
  c.densify_grad_decay_iterations =
      config.get_int("train.densify_grad_decay_iterations", c.densify_grad_decay_iterations);
  c.clone_scale_fraction = config.get_double("train.clone_scale_fraction", c.clone_scale_fraction);
  c.split_scale_divisor = config.get_double("train.split_scale_divisor", c.split_scale_divisor);
  c.prune_opacity = config.get_double("train.prune_opacity", c.prune_opacity);
  c.prune_radius_fraction =
      config.get_double("train.prune_radius_fraction", c.prune_radius_fraction);
  c.max_gaussians = static_cast<std::size_t>(
      config.get_u64("train.max_gaussians", c.max_gaussians));
  c.opacity_reset_interval = config.get_int("train.opacity_reset_interval", c.opacity_reset_interval);
  c.opacity_reset_until = config.get_int("train.opacity_reset_until", c.opacity_reset_until);
  c.opacity_reset_value = config.get_double("train.opacity_reset_value", c.opacity_reset_value);
  c.n_max_events = config.get_u64("train.n_max_events", c.n_max_events);
  c.adaptive_windows = config.get_bool("train.adaptive_windows", c.adaptive_windows);
  c.fixed_t_max_us = config.get_u64("train.fixed_t_max_us", c.fixed_t_max_us);
  c.weights.lambda_long = config.get_double("train.lambda_long", c.weights.lambda_long);
  c.weights.lambda_short = config.get_double("train.lambda_short", c.weights.lambda_short);
  c.weights.iso_before = config.get_double("train.iso_before", c.weights.iso_before);
  c.weights.iso_after = config.get_double("train.iso_after", c.weights.iso_after);
  c.weights.iso_switch_iteration =
      config.get_int("train.iso_switch_iteration", c.weights.iso_switch_iteration);
  c.weights.lambda_pose = config.get_double("train.lambda_pose", c.weights.lambda_pose);
  c.alpha_no_event = config.get_double("train.alpha_no_event", c.alpha_no_event);
  c.refine_poses = config.get_bool("train.refine_poses", c.refine_poses);
  c.freeze_poses = config.get_bool("train.freeze_poses", c.freeze_poses);
  c.freeze_gaussians = config.get_bool("train.freeze_gaussians", c.freeze_gaussians);
  c.lr_pose = config.get_double("train.lr_pose", c.lr_pose);
  c.sh_degree_cap_refined =
      static_cast<int>(config.get_int("train.sh_degree_cap_refined", c.sh_degree_cap_refined));
  c.sh_degree_cap_static =
      static_cast<int>(config.get_int("train.sh_degree_cap_static", c.sh_degree_cap_static));
  c.sh_unlock_interval = config.get_int("train.sh_unlock_interval", c.sh_unlock_interval);
  c.lr_means_start = config.get_double("train.lr_means_start", c.lr_means_start);
  c.lr_means_end = config.get_double("train.lr_means_end", c.lr_means_end);
  c.lr_means_decay_iterations =
      config.get_int("train.lr_means_decay_iterations", c.lr_means_decay_iterations);
  c.lr_sh = config.get_double("train.lr_sh", c.lr_sh);
  c.lr_sh_rest_divisor = config.get_double("train.lr_sh_rest_divisor", c.lr_sh_rest_divisor);
  c.lr_opacity = config.get_double("train.lr_opacity", c.lr_opacity);
  c.lr_scales = config.get_double("train.lr_scales", c.lr_scales);
  c.lr_rotations = config.get_double("train.lr_rotations", c.lr_rotations);
  c.init_gaussians = static_cast<std::size_t>(
      config.get_u64("train.init_gaussians", c.init_gaussians));
  c.init_opacity = config.get_double("train.init_opacity", c.init_opacity);
  c.seed = config.get_u64("train.seed", c.seed);
  c.threads = static_cast<int>(config.get_int("train.threads", c.threads));
  const double bg = config.get_double("train.background_display", -1.0);
  if (bg >= 0.0) c.background = Vec3::Constant(display_to_linear(bg));
  c.validate();
  return c;
}

}  // namespace evsplat
