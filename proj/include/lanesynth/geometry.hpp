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

#ifndef LANESYNTH__GEOMETRY_HPP_
#define LANESYNTH__GEOMETRY_HPP_

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <compare>
#include <cstdint>
#include <vector>

namespace lanesynth
{

// Camera axes: +Z forward (optical axis), +X right (lateral), +Y down.

/// Identifies the reference frame a point cloud is expressed in. Camera
/// frames use their sequence index; the world frame is the sentinel -1.
struct FrameId
{
  std::int64_t value{-1};

  static constexpr FrameId world() { return FrameId{-1}; }
  constexpr bool is_world() const { return value < 0; }

  auto operator<=>(const FrameId &) const = default;
};

/// Element of SE(3). Rotation is stored as an orthonormal 3x3 matrix; the
/// public constructor rejects anything that is not a proper rotation to 1e-9.
class RigidTransform
{
public:
  static constexpr double kTolerance = 1e-9;

  RigidTransform();
  RigidTransform(const Eigen::Matrix3d & rotation, const Eigen::Vector3d & translation);

  static RigidTransform identity() { return RigidTransform(); }

  /// Quaternion input is normalized; a norm further than 1e-3 from one is
  /// rejected as a parse error.
  static RigidTransform from_quaternion(
    const Eigen::Quaterniond & q, const Eigen::Vector3d & translation);

  /// Projects an approximately orthonormal matrix back onto SO(3).
  static RigidTransform orthonormalized(
    const Eigen::Matrix3d & rotation, const Eigen::Vector3d & translation);

  /// 3x4 [R | t] in row-major order.
  static RigidTransform from_row_major(const std::array<double, 12> & values);

  const Eigen::Matrix3d & rotation() const { return rotation_; }
  const Eigen::Vector3d & translation() const { return translation_; }

  Eigen::Matrix4d matrix() const;
  Eigen::Quaterniond quaternion() const;
  std::array<double, 12> row_major() const;

  Eigen::Vector3d operator*(const Eigen::Vector3d & p) const
  {
    return rotation_ * p + translation_;
  }

private:
  struct Unchecked
  {
  };
  RigidTransform(Unchecked, const Eigen::Matrix3d & rotation, const Eigen::Vector3d & translation)
  : rotation_(rotation), translation_(translation)
  {
  }

  friend RigidTransform compose(const RigidTransform & a, const RigidTransform & b);
  friend RigidTransform inverse(const RigidTransform & t);

  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

/// Homogeneous product a * b.
RigidTransform compose(const RigidTransform & a, const RigidTransform & b);

/// Rotation R^T, translation -R^T t.
RigidTransform inverse(const RigidTransform & t);

/// T_B^-1 * T_A: maps coordinates expressed in frame A into frame B.
RigidTransform relative_transform(const RigidTransform & t_b, const RigidTransform & t_a);

/// Pure translation by x along the camera's lateral axis.
RigidTransform lateral_shift(double x);

/// Largest absolute entry difference between the 4x4 matrices of a and b.
double max_abs_difference(const RigidTransform & a, const RigidTransform & b);

struct CameraIntrinsics
{
  double fx{320.0};
  double fy{320.0};
  double cx{320.0};
  double cy{96.0};
  int width{640};
  int height{192};

  /// Throws kConfiguration when any invariant is violated.
  void validate() const;

  /// Pinhole camera with square pixels and the principal point at the
  /// image center.
  static CameraIntrinsics from_horizontal_fov(int width, int height, double fov_rad);
};

struct ImagePoint
{
  double x_im{0.0};
  double y_im{0.0};
  double depth{0.0};
};

struct PointCloud
{
  std::vector<Eigen::Vector3d> points;
  FrameId frame{FrameId::world()};

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

PointCloud apply(const RigidTransform & t, const PointCloud & cloud, FrameId target);

/// Throws kDegenerateProjection when the point has zero depth.
ImagePoint project(const CameraIntrinsics & intr, const Eigen::Vector3d & point);

/// Points behind the camera are never in view.
bool in_image_plane(const CameraIntrinsics & intr, const ImagePoint & ip);

/// project + in_image_plane, treating zero depth as out of view.
bool in_view(const CameraIntrinsics & intr, const Eigen::Vector3d & point);

bool all_finite(const PointCloud & cloud);

}  // namespace lanesynth

#endif  // LANESYNTH__GEOMETRY_HPP_
