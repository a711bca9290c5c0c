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

#include "lanesynth/geometry.hpp"

#include "lanesynth/error.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace lanesynth
{

namespace
{

bool is_rotation(const Eigen::Matrix3d & r)
{
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho < RigidTransform::kTolerance &&
         std::abs(r.determinant() - 1.0) <= RigidTransform::kTolerance;
}

}  // namespace

RigidTransform::RigidTransform()
: rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero())
{
}

RigidTransform::RigidTransform(const Eigen::Matrix3d & rotation, const Eigen::Vector3d & translation)
: rotation_(rotation), translation_(translation)
{
  if (!rotation.allFinite() || !translation.allFinite()) {
    fail(ErrorCode::kInvalidArgument, "rigid transform has non-finite entries");
  }
  if (!is_rotation(rotation)) {
    fail(ErrorCode::kInvalidArgument, "rigid transform rotation is not orthonormal with det 1");
  }
}

RigidTransform RigidTransform::from_quaternion(
  const Eigen::Quaterniond & q, const Eigen::Vector3d & translation)
{
  const double norm = q.norm();
  if (!std::isfinite(norm) || std::abs(norm - 1.0) > 1e-3) {
    std::ostringstream msg;
    msg << "quaternion norm " << norm << " deviates from 1 by more than 1e-3";
    fail(ErrorCode::kParse, msg.str());
  }
  return RigidTransform(q.normalized().toRotationMatrix(), translation);
}

RigidTransform RigidTransform::orthonormalized(
  const Eigen::Matrix3d & rotation, const Eigen::Vector3d & translation)
{
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return RigidTransform(r, translation);
}

RigidTransform RigidTransform::from_row_major(const std::array<double, 12> & v)
{
  Eigen::Matrix3d r;
  r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
  return RigidTransform(r, Eigen::Vector3d(v[3], v[7], v[11]));
}

Eigen::Matrix4d RigidTransform::matrix() const
{
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = rotation_;
  m.topRightCorner<3, 1>() = translation_;
  return m;
}

Eigen::Quaterniond RigidTransform::quaternion() const
{
  return Eigen::Quaterniond(rotation_).normalized();
}

std::array<double, 12> RigidTransform::row_major() const
{
  std::array<double, 12> out{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      out[static_cast<std::size_t>(r * 4 + c)] = rotation_(r, c);
    }
    out[static_cast<std::size_t>(r * 4 + 3)] = translation_(r);
  }
  return out;
}

RigidTransform compose(const RigidTransform & a, const RigidTransform & b)
{
  return RigidTransform(
    RigidTransform::Unchecked{}, a.rotation_ * b.rotation_,
    a.rotation_ * b.translation_ + a.translation_);
}

RigidTransform inverse(const RigidTransform & t)
{
  const Eigen::Matrix3d rt = t.rotation_.transpose();
  return RigidTransform(RigidTransform::Unchecked{}, rt, -(rt * t.translation_));
}

RigidTransform relative_transform(const RigidTransform & t_b, const RigidTransform & t_a)
{
  return compose(inverse(t_b), t_a);
}

RigidTransform lateral_shift(double x)
{
  if (!std::isfinite(x)) {
    fail(ErrorCode::kInvalidArgument, "lateral shift must be finite");
  }
  return RigidTransform(Eigen::Matrix3d::Identity(), Eigen::Vector3d(x, 0.0, 0.0));
}

double max_abs_difference(const RigidTransform & a, const RigidTransform & b)
{
  return (a.matrix() - b.matrix()).cwiseAbs().maxCoeff();
}

void CameraIntrinsics::validate() const
{
  const bool ok = fx > 0.0 && fy > 0.0 && width > 0 && height > 0 && cx >= 0.0 &&
                  cx < width && cy >= 0.0 && cy < height && std::isfinite(fx) &&
                  std::isfinite(fy);
  if (!ok) {
    fail(ErrorCode::kConfiguration, "invalid camera intrinsics");
  }
}

CameraIntrinsics CameraIntrinsics::from_horizontal_fov(int width, int height, double fov_rad)
{
  CameraIntrinsics intr;
  intr.width = width;
  intr.height = height;
  intr.cx = width / 2.0;
  intr.cy = height / 2.0;
  intr.fx = intr.cx / std::tan(fov_rad / 2.0);
  intr.fy = intr.fx;
  intr.validate();
  return intr;
}

PointCloud apply(const RigidTransform & t, const PointCloud & cloud, FrameId target)
{
  PointCloud out;
  out.frame = target;
  out.points.reserve(cloud.points.size());
  for (const auto & p : cloud.points) {
    out.points.push_back(t * p);
  }
  return out;
}

ImagePoint project(const CameraIntrinsics & intr, const Eigen::Vector3d & point)
{
  const double z = point.z();
  if (z == 0.0) {
    fail(ErrorCode::kDegenerateProjection, "cannot project a point with zero depth");
  }
  return ImagePoint{
    (intr.fx * point.x() + intr.cx * z) / z, (intr.fy * point.y() + intr.cy * z) / z, z};
}

bool in_image_plane(const CameraIntrinsics & intr, const ImagePoint & ip)
{
  return ip.depth > 0.0 && ip.x_im >= 0.0 && ip.x_im < intr.width && ip.y_im >= 0.0 &&
         ip.y_im < intr.height;
}

bool in_view(const CameraIntrinsics & intr, const Eigen::Vector3d & point)
{
  if (!(point.z() > 0.0)) {
    return false;
  }
  return in_image_plane(intr, project(intr, point));
}

bool all_finite(const PointCloud & cloud)
{
  for (const auto & p : cloud.points) {
    if (!p.allFinite()) {
      return false;
    }
  }
  return true;
}

const char * to_string(ErrorCode code)
{
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid argument";
    case ErrorCode::kConfiguration: return "configuration error";
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kDegenerateProjection: return "degenerate projection";
    case ErrorCode::kDegenerateFrame: return "degenerate frame";
    case ErrorCode::kEndOfTrajectory: return "end of trajectory";
    case ErrorCode::kInvalidPose: return "invalid pose";
    case ErrorCode::kOutOfTrack: return "out of track";
    case ErrorCode::kInvalidInput: return "invalid input";
    case ErrorCode::kIncompatibleVersion: return "incompatible version";
    case ErrorCode::kVerification: return "verification failed";
    case ErrorCode::kInternal: return "internal error";
  }
  return "unknown";
}

}  // namespace lanesynth
