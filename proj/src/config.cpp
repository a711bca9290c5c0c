// Copyright 2026 The lanesynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lanesynth/config.hpp"

#include "lanesynth/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace lanesynth
{

namespace
{

const std::map<std::string, std::string> & default_values()
{
  static const std::map<std::string, std::string> values = {
    {"run.seed", ""},
    {"run.jobs", "1"},

    {"world.track", "town"},
    {"world.spacing", "1.0"},
    {"world.frame_interval", "0.1"},
    {"world.noise_translation", "0.01"},
    {"world.noise_rotation", "0.002"},

    {"camera.fx", "320"},
    {"camera.fy", "320"},
    {"camera.cx", "320"},
    {"camera.cy", "96"},
    {"camera.width", "640"},
    {"camera.height", "192"},

    {"cloud.max_distance", "20"},
    {"cloud.dilation_radius", "1"},
    {"cloud.scale_factor", "1"},
    {"cloud.edge_filter", "true"},
    {"cloud.edge_sigma", "1.0"},
    {"cloud.edge_low", "0.15"},
    {"cloud.edge_high", "0.35"},
    {"cloud.frame_point_cap", "16384"},

    {"augment.offsets", ""},
    {"augment.offset_count", "10"},
    {"augment.offset_min", "-2"},
    {"augment.offset_max", "2"},
    {"augment.max_lookback", "8"},
    {"augment.counteract", "true"},
    {"augment.align", "true"},
    {"augment.coverage_target", "0.98"},
    {"augment.coverage_cell", "16"},

    {"label.poses", "vo"},
    {"label.lookahead", "5"},
    {"label.clamp", "3"},
    {"label.n_points", "256"},
    {"label.skip_insufficient_lookback", "false"},

    {"model.point_widths", "32,64,128"},
    {"model.head_widths", "64,32"},
    {"model.output_scale", "3"},
    {"model.input_scale", "0.1"},

    {"train.learning_rate", "0.01"},
    {"train.momentum", "0.9"},
    {"train.batch_size", "32"},
    {"train.epochs", "8"},
    {"train.max_steps", "0"},
    {"train.grad_clip", "5"},
    {"train.validation_fraction", "0.1"},

    {"eval.tracks", "heldout-a,heldout-b,heldout-c"},
    {"eval.starts_per_track", "2"},
    {"eval.frames", "135"},
    {"eval.speed", "10"},
    {"eval.dt", "0.1"},
    {"eval.max_steer", "0.5"},
    {"eval.perturbations", "0"},
    {"eval.alpha", "auto"},
    {"eval.lookahead", "5"},
    {"eval.calibration_track", "calibration"},
    {"eval.calibration_starts", "4"},
    {"eval.alpha_min", "0.02"},
    {"eval.alpha_max", "2"},
    {"eval.alpha_count", "12"},
    {"eval.oracle", "true"},
    {"eval.svg", "true"},
  };
  return values;
}

std::string trim(const std::string & s)
{
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) {
    return "";
  }
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<std::string> split_list(const std::string & text)
{
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) {
      out.push_back(item);
    }
  }
  return out;
}

Options::Options() : values_(default_values()) {}

void Options::set(const std::string & key, const std::string & value)
{
  auto it = values_.find(key);
  if (it == values_.end()) {
    fail(ErrorCode::kConfiguration, "unknown option '" + key + "'");
  }
  it->second = trim(value);
}

void Options::load_string(const std::string & text)
{
  std::istringstream in(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error & e) {
    fail(ErrorCode::kParse, "config line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto & [section, body] : tree) {
    if (body.empty()) {
      fail(ErrorCode::kParse, "config key '" + section + "' must sit inside a [section]");
    }
    for (const auto & [key, value] : body) {
      set(section + "." + key, value.get_value<std::string>());
    }
  }
}

void Options::load_file(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::kIo, "cannot open config file " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  load_string(ss.str());
}

bool Options::has(const std::string & key) const { return values_.count(key) != 0; }

const std::string & Options::get(const std::string & key) const
{
  auto it = values_.find(key);
  if (it == values_.end()) {
    fail(ErrorCode::kInternal, "option '" + key + "' is not defined");
  }
  return it->second;
}

double Options::get_double(const std::string & key) const
{
  const std::string & v = get(key);
  char * end = nullptr;
  errno = 0;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || errno == ERANGE || std::isnan(d)) {
    fail(ErrorCode::kConfiguration, "option '" + key + "' expects a number, got '" + v + "'");
  }
  return d;
}

std::int64_t Options::get_int(const std::string & key) const
{
  const std::string & v = get(key);
  char * end = nullptr;
  errno = 0;
  const long long i = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0' || errno == ERANGE) {
    fail(ErrorCode::kConfiguration, "option '" + key + "' expects an integer, got '" + v + "'");
  }
  return i;
}

std::uint64_t Options::get_uint(const std::string & key) const
{
  const std::string & v = get(key);
  char * end = nullptr;
  errno = 0;
  const unsigned long long i = std::strtoull(v.c_str(), &end, 10);
  if (v.empty() || v[0] == '-' || *end != '\0' || errno == ERANGE) {
    fail(ErrorCode::kConfiguration, "option '" + key + "' expects an unsigned integer, got '" + v + "'");
  }
  return i;
}

bool Options::get_bool(const std::string & key) const
{
  const std::string & v = get(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") {
    return true;
  }
  if (v == "false" || v == "0" || v == "no" || v == "off") {
    return false;
  }
  fail(ErrorCode::kConfiguration, "option '" + key + "' expects true or false, got '" + v + "'");
}

std::vector<double> Options::get_doubles(const std::string & key) const
{
  std::vector<double> out;
  for (const auto & item : split_list(get(key))) {
    char * end = nullptr;
    const double d = std::strtod(item.c_str(), &end);
    if (*end != '\0' || std::isnan(d)) {
      fail(ErrorCode::kConfiguration, "option '" + key + "' holds a non-numeric entry '" + item + "'");
    }
    out.push_back(d);
  }
  return out;
}

std::vector<int> Options::get_ints(const std::string & key) const
{
  std::vector<int> out;
  for (const auto & item : split_list(get(key))) {
    char * end = nullptr;
    const long v = std::strtol(item.c_str(), &end, 10);
    if (*end != '\0') {
      fail(ErrorCode::kConfiguration, "option '" + key + "' holds a non-integer entry '" + item + "'");
    }
    out.push_back(static_cast<int>(v));
  }
  return out;
}

std::vector<std::string> Options::get_strings(const std::string & key) const
{
  return split_list(get(key));
}

std::map<std::string, std::string> Options::section(const std::string & name) const
{
  std::map<std::string, std::string> out;
  const std::string prefix = name + ".";
  for (auto it = values_.lower_bound(prefix); it != values_.end() && it->first.rfind(prefix, 0) == 0; ++it) {
    out[it->first.substr(prefix.size())] = it->second;
  }
  return out;
}

std::string Options::to_ini() const
{
  std::string out;
  std::string current;
  for (const auto & [key, value] : values_) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != current) {
      out += (current.empty() ? "" : "\n") + std::string("[") + sec + "]\n";
      current = sec;
    }
    out += key.substr(dot + 1) + " = " + value + "\n";
  }
  return out;
}

}  // namespace lanesynth
