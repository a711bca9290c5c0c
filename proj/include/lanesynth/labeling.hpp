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

#ifndef LANESYNTH__LABELING_HPP_
#define LANESYNTH__LABELING_HPP_

#include "lanesynth/augmentation.hpp"
#include "lanesynth/geometry.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace lanesynth
{

struct SteeringParams
{
  double alpha{1.0};  // 1/m
  double lookahead{5.0};  // m

  void validate() const;
};

struct LabeledSample
{
  PointCloud cloud;
  double delta_x{0.0};
  double trajectory_offset{0.0};
  FrameId frame;
  FrameId future_frame;
  bool clamped{false};
};

struct LabelConfig
{
  double lookahead{5.0};
  double clamp{3.0};  // |delta_x| bound, equal to the model output scale
  int n_points{4096};
  std::uint64_t seed{0};
  bool skip_insufficient_lookback{false};

  void validate() const;
};

struct TrajectoryStats
{
  double offset{0.0};
  std::size_t samples{0};
  std::size_t dropped{0};  // synthesis drops plus frames without a future frame
};

struct DatasetReport
{
  std::vector<TrajectoryStats> trajectories;
  std::size_t clamped{0};
};

/// Smallest j > i whose position lies at least `lookahead` ahead along the
/// optical axis of pose i. Throws kEndOfTrajectory when none exists.
std::size_t select_future_frame(
  const std::vector<RigidTransform> & poses, std::size_t i, double lookahead);

/// Lateral (camera X) coordinate of pose_j's position in pose_i's frame.
double lateral_offset(const RigidTransform & pose_i, const RigidTransform & pose_j);

double steering_from_offset(double delta_x, const SteeringParams & p);

/// Deterministic per-sample seed.
std::uint64_t sample_seed(std::uint64_t seed, std::size_t trajectory, std::int64_t frame);

/// Labels single synthesized frames against a reference pose sequence
/// indexed by frame id.
class Labeler
{
public:
  Labeler(std::vector<RigidTransform> reference_poses, LabelConfig cfg);

  /// Empty when the frame has no future frame (or is excluded by config).
  std::optional<LabeledSample> label(
    const SynthesizedFrame & frame, double trajectory_offset, std::size_t trajectory) const;

  const LabelConfig & config() const { return cfg_; }

private:
  std::vector<RigidTransform> poses_;
  std::vector<std::optional<std::size_t>> future_;
  LabelConfig cfg_;
};

/// Labels every synthesized frame against the reference sequence: the
/// future frame is chosen on `reference_poses` (indexed by frame id) and the
/// label is its lateral offset seen from the synthesized pose, so shifted
/// frames are labelled with the correction back to the reference path.
std::vector<LabeledSample> build_dataset(
  const std::vector<Trajectory> & trajectories, const std::vector<RigidTransform> & reference_poses,
  const LabelConfig & cfg, DatasetReport * report = nullptr, int jobs = 1);

}  // namespace lanesynth

#endif  // LANESYNTH__LABELING_HPP_
