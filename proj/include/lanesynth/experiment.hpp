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

#ifndef LANESYNTH__EXPERIMENT_HPP_
#define LANESYNTH__EXPERIMENT_HPP_

#include "lanesynth/augmentation.hpp"
#include "lanesynth/depthcloud.hpp"
#include "lanesynth/labeling.hpp"
#include "lanesynth/model.hpp"
#include "lanesynth/simulator.hpp"
#include "lanesynth/synthworld.hpp"

#include <memory>
#include <string>
#include <vector>

namespace lanesynth
{

/// Renders every pose once and builds one set of frame records per cloud
/// configuration. Records carry record_poses (for example odometry poses)
/// while rendering uses render_poses.
std::vector<std::vector<FrameRecord>> make_frame_records(
  const Scene & scene, const CameraIntrinsics & intr, const std::vector<RigidTransform> & render_poses,
  const std::vector<RigidTransform> & record_poses, const std::vector<double> & timestamps,
  const std::vector<CloudConfig> & clouds, int jobs);

/// Augmentation followed by labeling without keeping full clouds around.
/// Samples come out ordered by trajectory, then frame.
std::vector<LabeledSample> synthesize_dataset(
  const std::vector<FrameRecord> & frames, const CameraIntrinsics & intr, const AugmentConfig & augment,
  const Labeler & labeler, int jobs, DatasetReport * report = nullptr);

/// One training configuration of the ablation study.
struct Variant
{
  std::string name;
  CloudConfig cloud;
  AugmentConfig augment;
};

/// Model, point count and schedule used for desk-scale experiments.
struct DeskPreset
{
  ModelConfig model;
  TrainConfig train;
  LabelConfig label;
  CloudConfig cloud;
  AugmentConfig augment;
  PoseNoiseModel noise;
  double alpha_lo{0.02};
  double alpha_hi{2.0};
  int alpha_grid{12};
  int calibration_starts{4};
  std::uint64_t model_seed{3};

  static DeskPreset standard();
};

/// "ours", "single", "shift-only", "unfiltered", "unlimited-distance",
/// "no-counteraction" (the oracle has no training configuration).
std::vector<Variant> ablation_variants(const DeskPreset & preset);

struct TrainedVariant
{
  Variant variant;
  std::shared_ptr<const PointNetLite> net;
  TrainResult result;
  std::size_t samples{0};
};

/// Trains every variant on one training track. Variants with fewer samples
/// than the first one train for the same number of optimizer steps.
std::vector<TrainedVariant> train_variants(
  const TrackSpec & track, const CameraIntrinsics & intr, const DeskPreset & preset,
  const std::vector<Variant> & variants, int jobs);

}  // namespace lanesynth

#endif  // LANESYNTH__EXPERIMENT_HPP_
