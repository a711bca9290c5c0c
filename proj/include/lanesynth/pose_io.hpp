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

#ifndef LANESYNTH__POSE_IO_HPP_
#define LANESYNTH__POSE_IO_HPP_

#include "lanesynth/geometry.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace lanesynth
{

struct StampedPose
{
  double timestamp{0.0};
  RigidTransform pose;
};

// TUM trajectory layout: `timestamp tx ty tz qx qy qz qw` per line, '#'
// comments, strictly increasing timestamps.
std::vector<StampedPose> read_tum(std::istream & in);
std::vector<StampedPose> read_tum(const std::filesystem::path & path);

void write_tum(std::ostream & out, const std::vector<StampedPose> & poses);
void write_tum(const std::filesystem::path & path, const std::vector<StampedPose> & poses);

}  // namespace lanesynth

#endif  // LANESYNTH__POSE_IO_HPP_
