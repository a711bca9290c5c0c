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

#ifndef LANESYNTH__SIMULATOR_HPP_
#define LANESYNTH__SIMULATOR_HPP_

#include "lanesynth/depthcloud.hpp"
#include "lanesynth/geometry.hpp"
#include "lanesynth/labeling.hpp"
#include "lanesynth/model.hpp"
#include "lanesynth/synthworld.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace lanesynth
{

/// Kinematic bicycle referenced at the rear axle. Heading is measured
/// counter-clockwise in the world ground plane and positive steering turns
/// left.
struct VehicleState
{
  Eigen::Vector2d position{0.0, 0.0};
  double heading{0.0};
  double speed{10.0};
  double wheelbase{2.7};
  double length{4.5};
  double width{1.8};
  double camera_forward{1.35};  // camera position ahead of the rear axle

  /// Box corners, with the box centered between the axles.
  std::array<Eigen::Vector2d, 4> corners() const;
  RigidTransform camera(double height) const;
};

VehicleState step(const VehicleState & state, double steer, double dt);

/// All four box corners inside the ego lane.
bool on_lane(const Track & track, const VehicleState & state);

/// True when any box corner lies inside a barrier or obstacle.
bool collides(const Scene & scene, const VehicleState & state);

/// Uniform additive noise with half-width level * max_steer.
double perturb_steering(double steer, double level, double max_steer, std::mt19937_64 & rng);

struct Observation
{
  const Scene & scene;
  const CameraIntrinsics & intr;
  const VehicleState & state;
  const RigidTransform & camera;
  const RenderedFrame * frame;  // null for controllers that do not look
  std::uint64_t seed;
};

class Controller
{
public:
  virtual ~Controller() = default;
  virtual std::string name() const = 0;
  virtual bool needs_frame() const { return true; }
  /// Steering in radians, positive left.
  virtual double steer(const Observation & obs) const = 0;
};

/// Offsets are positive to the right and steering positive to the left, so
/// the command is the negated bicycle-model angle.
double steer_toward(double delta_x, double alpha);

/// Steers toward the centerline point `lookahead` meters ahead of the
/// camera's track projection.
class OracleController : public Controller
{
public:
  OracleController(SteeringParams params, std::string name = "oracle");
  std::string name() const override { return name_; }
  bool needs_frame() const override { return false; }
  double steer(const Observation & obs) const override;

private:
  SteeringParams params_;
  std::string name_;
};

class ConstantController : public Controller
{
public:
  explicit ConstantController(double steer, std::string name = "constant");
  std::string name() const override { return name_; }
  bool needs_frame() const override { return false; }
  double steer(const Observation &) const override { return steer_; }

private:
  double steer_;
  std::string name_;
};

/// Rendered frame -> local cloud -> fixed-size sample -> network offset.
class ModelController : public Controller
{
public:
  ModelController(
    std::shared_ptr<const PointNetLite> net, CloudConfig cloud, int n_points, double alpha,
    std::string name);
  std::string name() const override { return name_; }
  double steer(const Observation & obs) const override;
  double predict_offset(const Observation & obs) const;

private:
  std::shared_ptr<const PointNetLite> net_;
  CloudConfig cloud_;
  int n_points_;
  double alpha_;
  std::string name_;
};

struct EpisodeConfig
{
  double start_s{0.0};
  double start_offset{0.0};
  int frames{135};
  double speed{10.0};
  double dt{0.1};
  double max_steer{0.5};
  double perturbation{0.0};
  std::uint64_t seed{0};

  void validate() const;
};

struct EpisodeResult
{
  std::vector<std::uint8_t> on_lane;
  std::vector<double> offsets;  // camera offset from the centerline, NaN off track
  std::vector<VehicleState> path;
  double ratio_on_lane{0.0};
  bool terminated_early{false};
  std::string termination{"completed"};
};

EpisodeResult run_episode(
  const Scene & scene, const CameraIntrinsics & intr, const Controller & controller,
  const EpisodeConfig & cfg);

struct StartPosition
{
  std::string track;
  int start_idx{0};
  double s{0.0};
};

/// `count` starts spread evenly over the part of the track that leaves
/// room for an episode of `episode_length` meters plus margin.
std::vector<StartPosition> spread_starts(
  const std::string & track_name, const Track & track, int count, double episode_length);

struct SweepRow
{
  std::string controller;
  std::string track;
  int start_idx{0};
  double perturbation{0.0};
  double ratio_on_lane{0.0};
  int frames{0};
  bool terminated_early{false};
  std::uint64_t seed{0};
  EpisodeResult episode;
};

struct SweepSpec
{
  std::vector<std::pair<std::string, const Scene *>> tracks;
  std::vector<StartPosition> starts;
  std::vector<const Controller *> controllers;
  std::vector<double> perturbations{0.0};
  std::vector<std::uint64_t> seeds{0};
  EpisodeConfig episode;
  int jobs{1};
};

std::vector<SweepRow> sweep(const SweepSpec & spec, const CameraIntrinsics & intr);

struct SummaryRow
{
  std::string controller;
  double perturbation{0.0};
  double mean_ratio{0.0};
  std::size_t episodes{0};
};

std::vector<SummaryRow> summarize(const std::vector<SweepRow> & rows);
double mean_ratio(
  const std::vector<SweepRow> & rows, const std::string & controller, double perturbation);

std::string format_report_csv(const std::vector<SweepRow> & rows);
std::string format_summary_csv(const std::vector<SummaryRow> & rows);
/// Top view: road surface outline, lane lines, driven path and start marker.
std::string render_bev_svg(const Track & track, const EpisodeResult & episode);

struct AlphaCalibration
{
  double alpha{0.0};
  std::vector<double> grid;
  std::vector<double> ratios;
  std::vector<double> mean_abs_offsets;
};

/// Grid search over log-spaced alpha with the oracle controller; the best
/// mean ratio wins, ties go to the smaller mean |offset|.
AlphaCalibration calibrate_alpha(
  const Scene & scene, const CameraIntrinsics & intr, const std::vector<double> & grid,
  double lookahead, int starts, const EpisodeConfig & episode);

std::vector<double> log_space(double lo, double hi, int count);

}  // namespace lanesynth

#endif  // LANESYNTH__SIMULATOR_HPP_
