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

#ifndef LANESYNTH__MODEL_HPP_
#define LANESYNTH__MODEL_HPP_

#include "lanesynth/geometry.hpp"
#include "lanesynth/labeling.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace lanesynth
{

struct ModelConfig
{
  std::vector<int> point_widths{64, 128, 256};  // after the 3 input coordinates
  std::vector<int> head_widths{128, 32};  // hidden widths before the scalar output
  double output_scale{3.0};
  double input_scale{0.1};  // points are multiplied by this before the first layer

  void validate() const;
  int feature_width() const { return point_widths.empty() ? 3 : point_widths.back(); }
};

/// Intermediate values of one forward pass, reused by backward.
struct ForwardCache
{
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> point_act;  // post-ReLU, one column per point
  Eigen::VectorXd pooled;
  std::vector<Eigen::Index> argmax;
  std::vector<Eigen::VectorXd> head_act;
  double z{0.0};
  double output{0.0};
};

/// Flat parameter or gradient storage. Vectorized kernels pick their
/// summation order from the buffer address, so buffers are kept on the
/// SIMD alignment to make results independent of the heap layout.
using ParameterVector = std::vector<double, Eigen::aligned_allocator<double>>;

/// Shared per-point MLP, max pooling over points, MLP head and a scaled tanh
/// output. Parameters live in one flat vector; every layer stores its weight
/// matrix column-major followed by its bias.
class PointNetLite
{
public:
  PointNetLite() = default;
  PointNetLite(ModelConfig cfg, std::uint64_t seed);

  const ModelConfig & config() const { return cfg_; }
  ParameterVector & parameters() { return params_; }
  const ParameterVector & parameters() const { return params_; }
  std::size_t parameter_count() const { return params_.size(); }

  /// Prediction in meters, within (-a, a). Throws kInvalidInput for empty
  /// or non-finite clouds.
  double forward(const PointCloud & cloud) const;
  double forward(const Eigen::Matrix3Xd & points, ForwardCache & cache) const;

  /// Adds the gradient of (forward - label)^2 to grad (resized if needed)
  /// and returns the loss.
  double backward(const Eigen::Matrix3Xd & points, double label, ParameterVector & grad) const;
  double backward(const PointCloud & cloud, double label, ParameterVector & grad) const;

private:
  struct Layer
  {
    int in;
    int out;
    std::size_t offset;
  };
  Eigen::Map<const Eigen::MatrixXd> weight(const Layer & l) const;
  Eigen::Map<const Eigen::VectorXd> bias(const Layer & l) const;

  ModelConfig cfg_;
  std::vector<Layer> point_layers_;
  std::vector<Layer> head_layers_;
  ParameterVector params_;
};

Eigen::Matrix3Xd to_matrix(const PointCloud & cloud);

double squared_error(double pred, double label);
double mean_squared_error(const std::vector<double> & pred, const std::vector<double> & label);

struct TrainConfig
{
  double learning_rate{0.01};
  double momentum{0.9};
  int batch_size{32};
  int epochs{20};
  // When positive, training stops after this many optimizer steps, running
  // as many epochs as needed.
  std::int64_t max_steps{0};
  double grad_clip{5.0};  // global norm, 0 disables
  double validation_fraction{0.1};
  std::uint64_t seed{0};

  void validate() const;
};

struct EpochStats
{
  int epoch{0};
  std::int64_t steps{0};
  double train_mse{0.0};
  double validation_mse{0.0};  // NaN without a validation split
};

struct TrainResult
{
  std::vector<EpochStats> history;
  std::int64_t steps{0};
};

using EpochCallback = std::function<void(const EpochStats &)>;

TrainResult train(
  PointNetLite & net, const std::vector<LabeledSample> & data, const TrainConfig & cfg,
  const EpochCallback & on_epoch = {});

std::string format_loss_history(const std::vector<EpochStats> & history);

/// Binary checkpoint: "LSNN", u32 version, layer widths, output and input
/// scales, string metadata (input pipeline settings) and float64
/// parameters, little-endian.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint
{
  PointNetLite net;
  std::map<std::string, std::string> metadata;
};

std::string serialize_checkpoint(const Checkpoint & ckpt);
Checkpoint deserialize_checkpoint(const std::string & bytes);
void save_checkpoint(const std::filesystem::path & path, const Checkpoint & ckpt);
Checkpoint load_checkpoint(const std::filesystem::path & path);

}  // namespace lanesynth

#endif  // LANESYNTH__MODEL_HPP_
