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

#ifndef LANESYNTH__AUGMENTATION_HPP_
#define LANESYNTH__AUGMENTATION_HPP_

#include "lanesynth/geometry.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <limits>
#include <vector>

namespace lanesynth
{

/// One camera frame of the reference sequence: global pose and the local
/// (already filtered) point cloud, tagged with the frame's own id.
struct FrameRecord
{
  FrameId id;
  RigidTransform pose;
  PointCloud cloud;
  double timestamp{0.0};
};

struct AugmentConfig
{
  std::vector<double> offsets;
  int max_lookback{8};
  bool counteract{true};
  bool align{true};
  double max_distance{20.0};
  // Lookback stops early once this fraction of coarse image cells in the
  // new camera holds at least one point.
  double coverage_target{0.98};
  int coverage_cell{16};

  void validate() const;

  /// `count` offsets evenly spaced over [lo, hi] inclusive.
  static std::vector<double> uniform_offsets(int count, double lo, double hi);
};

struct SynthesizedFrame
{
  FrameRecord record;
  /// Source frame index of every point in record.cloud.
  std::vector<std::int64_t> provenance;
  int lookback_used{0};
  bool insufficient_lookback{false};
  double coverage{0.0};
};

struct Trajectory
{
  double offset{0.0};
  bool reference{false};
  std::vector<SynthesizedFrame> frames;
  std::vector<FrameId> dropped;
};

/// prev.cloud expressed in base's frame followed by base.cloud.
PointCloud align_concat(const FrameRecord & base, const FrameRecord & prev);

/// Keeps the points of an aligned cloud that fall outside base's image plane.
PointCloud counteract_filter(
  const FrameRecord & base, const PointCloud & aligned_prev, const CameraIntrinsics & intr);

/// Builds the cloud seen by a camera shifted laterally by x from
/// frames[base_idx]. Throws kDegenerateFrame when nothing remains.
SynthesizedFrame synthesize_frame(
  const std::vector<FrameRecord> & frames, std::size_t base_idx, double x,
  const CameraIntrinsics & intr, const AugmentConfig & cfg);

/// Receives (trajectory index, frame index, result); the result is empty
/// for dropped frames. Trajectory 0 is the reference, trajectory k > 0 uses
/// cfg.offsets[k - 1]. May be called concurrently from worker threads.
using FrameSink =
  std::function<void(std::size_t, std::size_t, std::optional<SynthesizedFrame> &&)>;

void for_each_synthesized(
  const std::vector<FrameRecord> & frames, const CameraIntrinsics & intr,
  const AugmentConfig & cfg, int jobs, const FrameSink & sink);

/// Reference trajectory first (unshifted, cropped), then one trajectory per
/// configured offset. Frames that come out empty are listed in `dropped`.
std::vector<Trajectory> generate_trajectories(
  const std::vector<FrameRecord> & frames, const CameraIntrinsics & intr,
  const AugmentConfig & cfg, int jobs = 1);

}  // namespace lanesynth

#endif  // LANESYNTH__AUGMENTATION_HPP_
