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

#ifndef LANESYNTH__CONFIG_HPP_
#define LANESYNTH__CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace lanesynth
{

/// Flat option store keyed by "section.key". Every known key has a default,
/// so a snapshot always lists the complete configuration. Setting an
/// unknown key is a configuration error.
class Options
{
public:
  Options();

  void set(const std::string & key, const std::string & value);
  /// INI file with [section] headers and `key = value` lines.
  void load_file(const std::filesystem::path & path);
  void load_string(const std::string & text);

  bool has(const std::string & key) const;
  const std::string & get(const std::string & key) const;
  double get_double(const std::string & key) const;
  std::int64_t get_int(const std::string & key) const;
  std::uint64_t get_uint(const std::string & key) const;
  bool get_bool(const std::string & key) const;
  std::vector<double> get_doubles(const std::string & key) const;
  std::vector<int> get_ints(const std::string & key) const;
  std::vector<std::string> get_strings(const std::string & key) const;

  /// Keys of one section, without the section prefix.
  std::map<std::string, std::string> section(const std::string & name) const;
  const std::map<std::string, std::string> & values() const { return values_; }

  /// INI text grouped by section, keys sorted.
  std::string to_ini() const;

private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(const std::string & text);

}  // namespace lanesynth

#endif  // LANESYNTH__CONFIG_HPP_
