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

// Independent reference implementations used by the unit and acceptance
// tests.

#ifndef LANESYNTH_TESTS__ORACLES_HPP_
#define LANESYNTH_TESTS__ORACLES_HPP_

#include "lanesynth/geometry.hpp"
#include "lanesynth/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace lanesynth::testing
{

/// Scalar image-plane test written from the bound definitions only.
inline bool scalar_in_plane(double x_im, double y_im, double depth, int width, int height)
{
  if (depth <= 0.0) {
    return false;
  }
  if (x_im < 0.0) {
    return false;
  }
  if (y_im < 0.0) {
    return false;
  }
  if (!(x_im < static_cast<double>(width))) {
    return false;
  }
  return y_im < static_cast<double>(height);
}

/// Scalar pinhole projection plus plane test for a camera-frame point.
inline bool scalar_in_fov(double x, double y, double z, double fx, double fy, double cx, double cy, int w, int h)
{
  if (z <= 0.0) {
    return false;
  }
  // Rows of K [x y z]^T, then the perspective divide.
  const double u = (fx * x + cx * z) / z;
  const double v = (fy * y + cy * z) / z;
  return scalar_in_plane(u, v, z, w, h);
}

struct GradientReport
{
  double worst_relative{0.0};
  std::size_t checked{0};
  std::size_t skipped{0};
  // Parameters whose difference stencil changes a ReLU state or a pooling
  // argmax; the finite difference is meaningless there.
  std::size_t kinks{0};
};

/// ReLU on/off states and pooling winners of one forward pass.
inline std::vector<std::int64_t> activation_pattern(const ForwardCache & c)
{
  std::vector<std::int64_t> out(c.argmax.begin(), c.argmax.end());
  for (const auto & a : c.point_act) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      out.push_back(a.data()[i] > 0.0);
    }
  }
  for (const auto & a : c.head_act) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      out.push_back(a[i] > 0.0);
    }
  }
  return out;
}

/// Central differences of the squared error against backward().
inline GradientReport gradient_check(
  PointNetLite & net, const Eigen::Matrix3Xd & points, double label, double eps = 1e-5, double floor = 1e-8)
{
  ParameterVector grad;
  net.backward(points, label, grad);
  auto & params = net.parameters();
  ForwardCache cache;
  net.forward(points, cache);
  const auto pattern = activation_pattern(cache);
  GradientReport report;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + eps;
    const double up = net.forward(points, cache) - label;
    bool kink = activation_pattern(cache) != pattern;
    params[i] = keep - eps;
    const double down = net.forward(points, cache) - label;
    kink = kink || activation_pattern(cache) != pattern;
    params[i] = keep;
    if (kink) {
      ++report.kinks;
      continue;
    }
    const double numeric = (up * up - down * down) / (2.0 * eps);
    const double scale = std::max(std::abs(numeric), std::abs(grad[i]));
    if (scale < floor) {
      ++report.skipped;
      continue;
    }
    ++report.checked;
    report.worst_relative = std::max(report.worst_relative, std::abs(numeric - grad[i]) / scale);
  }
  return report;
}

inline Eigen::Matrix3Xd random_points(std::mt19937_64 & rng, int n, double extent = 15.0)
{
  std::uniform_real_distribution<double> u(-extent, extent);
  Eigen::Matrix3Xd m(3, n);
  for (int j = 0; j < n; ++j) {
    m.col(j) << u(rng), u(rng), u(rng);
  }
  return m;
}

}  // namespace lanesynth::testing

#endif  // LANESYNTH_TESTS__ORACLES_HPP_
