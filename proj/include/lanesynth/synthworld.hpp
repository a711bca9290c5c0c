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

#ifndef LANESYNTH__SYNTHWORLD_HPP_
#define LANESYNTH__SYNTHWORLD_HPP_

#include "lanesynth/depthcloud.hpp"
#include "lanesynth/geometry.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lanesynth
{

// World frame: x/y span the ground plane (z = 0), z points up. Track
// offsets are signed lateral distances from the ego-lane centerline,
// positive to the right of the driving direction.

struct Segment
{
  enum class Kind
  {
    kStraight,
    kArc,
  };
  Kind kind{Kind::kStraight};
  double length{0.0};  // straight length, or arc length (radius * |angle|)
  double radius{0.0};
  double angle{0.0};  // signed, radians, positive turns left

  static Segment straight(double length) { return Segment{Kind::kStraight, length, 0.0, 0.0}; }
  static Segment arc(double radius, double angle_rad);
  double curvature() const;
};

struct BoxFeature
{
  Eigen::Vector2d center{0.0, 0.0};
  double length{1.0};  // along yaw
  double width{1.0};
  double height{1.0};
  double yaw{0.0};
};

struct PoleFeature
{
  Eigen::Vector2d center{0.0, 0.0};
  double radius{0.1};
  double height{3.0};
};

/// Two-lane road: the ego lane spans offsets [-w/2, w/2], the opposing lane
/// [-3w/2, -w/2]. Solid edge lines at +w/2 and -3w/2, dashed center line at
/// -w/2.
struct TrackSpec
{
  std::vector<Segment> segments;
  double lane_width{3.5};
  double camera_height{1.5};
  Eigen::Vector2d start_position{0.0, 0.0};
  double start_heading{0.0};

  bool lane_markings{true};
  double marking_width{0.15};
  double dash_length{3.0};
  double dash_gap{3.0};
  double shoulder{0.5};

  bool barriers{true};
  double barrier_clearance{1.0};  // from the road surface edge
  double barrier_height{0.8};
  double barrier_thickness{0.3};
  double barrier_piece{2.0};

  double pole_spacing{20.0};  // 0 disables the automatic pole row
  double pole_clearance{1.0};  // behind the right barrier
  double pole_radius{0.1};
  double pole_height{3.0};

  std::vector<BoxFeature> boxes;
  std::vector<PoleFeature> poles;

  double length() const;
  void validate() const;
};

/// `key = value` settings plus `segment straight <len>`,
/// `segment arc <radius> <angle_deg>`, `box x y len width height yaw_deg`,
/// `pole x y radius height` lines. Errors report the line number.
TrackSpec parse_track_spec(std::istream & in);
TrackSpec parse_track_spec(const std::string & text);
std::string format_track_spec(const TrackSpec & spec);

/// Named built-in tracks: "town" (training), "heldout-a", "heldout-b",
/// "heldout-c", "calibration", "corridor".
TrackSpec preset_track(std::string_view name);

struct CenterlinePoint
{
  Eigen::Vector2d position;
  double heading{0.0};
  double s{0.0};
};

struct TrackCoordinate
{
  double s{0.0};
  double offset{0.0};
  std::size_t segment{0};
};

class Track
{
public:
  explicit Track(TrackSpec spec);

  const TrackSpec & spec() const { return spec_; }
  double length() const { return length_; }

  /// s is clamped to [0, length].
  CenterlinePoint at(double s) const;

  /// Nearest centerline projection whose foot lies inside a segment.
  std::optional<TrackCoordinate> locate(const Eigen::Vector2d & p) const;
  std::optional<TrackCoordinate> locate(
    const Eigen::Vector2d & p, const std::vector<std::size_t> & candidates) const;

  /// Segments with any part closer than radius to p.
  std::vector<std::size_t> segments_near(const Eigen::Vector2d & p, double radius) const;

  double right_barrier_offset() const;
  double left_barrier_offset() const;

private:
  struct Piece
  {
    Eigen::Vector2d start;
    double heading;
    double kappa;
    double length;
    double s0;
    Eigen::Vector2d center;  // arcs only
  };
  std::optional<TrackCoordinate> locate_in(const Eigen::Vector2d & p, std::size_t i) const;

  TrackSpec spec_;
  std::vector<Piece> pieces_;
  double length_{0.0};
};

/// Camera pose (camera -> world) at ground position xy, heading in the
/// ground plane, and the given height; zero pitch and roll.
RigidTransform camera_pose(const Eigen::Vector2d & xy, double heading, double height);

/// Heading of the camera's optical axis projected on the ground plane.
double heading_of(const RigidTransform & camera_to_world);

enum class Material : std::uint8_t
{
  kSky = 0,
  kAsphalt,
  kMarking,
  kGrass,
  kBarrier,
  kPole,
  kObstacle,
};

float material_intensity(Material m);

struct RenderedFrame
{
  DepthMap depth;
  GrayImage intensity;
  EdgeMask edge_truth;
  std::vector<Material> material;
  RigidTransform pose;
  double timestamp{0.0};
};

struct RenderOptions
{
  double far_clip{100.0};
};

/// Scene primitives derived from a track: ground plane with painted
/// markings, barrier boxes along both road sides, pole cylinders and any
/// extra features listed in the spec.
class Scene
{
public:
  explicit Scene(const TrackSpec & spec, RenderOptions options = {});

  const Track & track() const { return track_; }
  const RenderOptions & options() const { return options_; }

  struct Box
  {
    Eigen::Vector2d center;
    double half_length;
    double half_width;
    double height;
    double cos_yaw;
    double sin_yaw;
    Material material;
  };
  struct Cylinder
  {
    Eigen::Vector2d center;
    double radius;
    double height;
    Material material;
  };

  const std::vector<Box> & boxes() const { return boxes_; }
  const std::vector<Cylinder> & cylinders() const { return cylinders_; }

  /// Ground material at a world ground position.
  Material ground_material(
    const Eigen::Vector2d & p, const std::vector<std::size_t> & candidates) const;

  /// Distance from a world point to the nearest primitive surface.
  double surface_distance(const Eigen::Vector3d & p) const;

  /// True if the ground footprint point lies inside a barrier or obstacle.
  bool inside_solid(const Eigen::Vector2d & p) const;

private:
  Track track_;
  RenderOptions options_;
  std::vector<Box> boxes_;
  std::vector<Cylinder> cylinders_;
};

/// Ray-casts depth (optical-axis Z, 0 where nothing is hit within the far
/// clip), material intensity and material-boundary edges. Throws
/// kInvalidPose when the camera is not above the ground plane.
RenderedFrame render(const Scene & scene, const RigidTransform & pose, const CameraIntrinsics & intr);

/// Centerline camera poses every `spacing` meters of arc length.
std::vector<RigidTransform> sample_reference(const Track & track, double spacing);

struct PoseNoiseModel
{
  double translation_sigma{0.01};  // RMS magnitude of the per-step translation error
  double rotation_sigma{0.002};  // RMS magnitude of the per-step rotation error
  std::uint64_t seed{0};
};

/// Visual-odometry style drift: every relative motion between consecutive
/// poses is corrupted by an independent small rigid perturbation, so errors
/// compound along the sequence. The first pose is unchanged.
std::vector<RigidTransform> perturb(
  const std::vector<RigidTransform> & poses, const PoseNoiseModel & noise);

/// Signed lateral distance of the pose position from the centerline,
/// positive to the right. Throws kOutOfTrack beyond the track extent.
double ground_truth_offset(const Track & track, const RigidTransform & pose);

}  // namespace lanesynth

#endif  // LANESYNTH__SYNTHWORLD_HPP_
