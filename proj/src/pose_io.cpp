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

#include "lanesynth/pose_io.hpp"

#include "lanesynth/error.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace lanesynth
{

std::vector<StampedPose> read_tum(std::istream & in)
{
  std::vector<StampedPose> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') {
      continue;
    }
    std::istringstream fields(line);
    double v[8];
    for (double & x : v) {
      if (!(fields >> x)) {
        fail(ErrorCode::kParse, "pose line " + std::to_string(line_no) + ": expected 8 numbers");
      }
    }
    std::string extra;
    if (fields >> extra) {
      fail(ErrorCode::kParse, "pose line " + std::to_string(line_no) + ": trailing fields");
    }
    if (!poses.empty() && !(v[0] > poses.back().timestamp)) {
      fail(
        ErrorCode::kParse,
        "pose line " + std::to_string(line_no) + ": timestamps must be strictly increasing");
    }
    try {
      poses.push_back(StampedPose{
        v[0], RigidTransform::from_quaternion(
                Eigen::Quaterniond(v[7], v[4], v[5], v[6]), Eigen::Vector3d(v[1], v[2], v[3]))});
    } catch (const Error & e) {
      fail(ErrorCode::kParse, "pose line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return poses;
}

std::vector<StampedPose> read_tum(const std::filesystem::path & path)
{
  std::ifstream in(path);
  if (!in) {
    fail(ErrorCode::kIo, "cannot open pose file " + path.string());
  }
  return read_tum(in);
}

void write_tum(std::ostream & out, const std::vector<StampedPose> & poses)
{
  out << "# timestamp tx ty tz qx qy qz qw\n";
  char buf[256];
  for (const auto & sp : poses) {
    const auto & t = sp.pose.translation();
    auto q = sp.pose.quaternion();
    // Canonical sign keeps the text output unique for a given rotation.
    if (q.w() < 0.0) {
      q.coeffs() *= -1.0;
    }
    std::snprintf(
      buf, sizeof(buf), "%.6f %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", sp.timestamp, t.x(), t.y(),
      t.z(), q.x(), q.y(), q.z(), q.w());
    out << buf;
  }
}

void write_tum(const std::filesystem::path & path, const std::vector<StampedPose> & poses)
{
  std::ofstream out(path);
  if (!out) {
    fail(ErrorCode::kIo, "cannot write pose file " + path.string());
  }
  write_tum(out, poses);
}

}  // namespace lanesynth
