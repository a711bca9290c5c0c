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

#ifndef LANESYNTH_TESTS__TEST_UTIL_HPP_
#define LANESYNTH_TESTS__TEST_UTIL_HPP_

#include "lanesynth/geometry.hpp"

#include <Eigen/Geometry>

#include <filesystem>
#include <random>
#include <string>

namespace lanesynth::testing
{

inline RigidTransform random_transform(std::mt19937_64 & rng, double translation = 10.0)
{
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_real_distribution<double> u(-translation, translation);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return RigidTransform::from_quaternion(q, Eigen::Vector3d(u(rng), u(rng), u(rng)));
}

inline PointCloud random_cloud(std::mt19937_64 & rng, std::size_t n, double extent = 20.0)
{
  std::uniform_real_distribution<double> u(-extent, extent);
  PointCloud c;
  for (std::size_t i = 0; i < n; ++i) {
    c.points.emplace_back(u(rng), u(rng), u(rng));
  }
  return c;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir
{
public:
  explicit TempDir(const std::string & tag)
  {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("lanesynth-test-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir()
  {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir & operator=(const TempDir &) = delete;

  const std::filesystem::path & path() const { return path_; }
  std::filesystem::path operator/(const std::string & rel) const { return path_ / rel; }

private:
  std::filesystem::path path_;
};

}  // namespace lanesynth::testing

#endif  // LANESYNTH_TESTS__TEST_UTIL_HPP_
