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

#include "lanesynth/depthcloud.hpp"
#include "lanesynth/error.hpp"
#include "lanesynth/synthworld.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace lanesynth;

namespace
{

TrackSpec bare_straight(double length)
{
  TrackSpec spec;
  spec.segments = {Segment::straight(length)};
  spec.barriers = false;
  spec.pole_spacing = 0.0;
  return spec;
}

double wrap(double a)
{
  return std::atan2(std::sin(a), std::cos(a));
}

}  // namespace

TEST_CASE("track spec parsing")
{
  const auto spec = parse_track_spec(
    "# comment\nlane_width = 3.2\nsegment straight 20\nsegment arc 30 45\nbox 5 1 2 1 1 0\n");
  CHECK(spec.lane_width == 3.2);
  REQUIRE(spec.segments.size() == 2);
  CHECK(spec.segments[1].angle == doctest::Approx(M_PI / 4.0));
  CHECK(spec.segments[1].length == doctest::Approx(30.0 * M_PI / 4.0));
  CHECK(spec.boxes.size() == 1);

  const auto again = parse_track_spec(format_track_spec(spec));
  CHECK(format_track_spec(again) == format_track_spec(spec));

  try {
    parse_track_spec("segment straight 10\nlane_width = wide\n");
    FAIL("expected a parse error");
  } catch (const Error & e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_track_spec("segment spiral 10\n"), Error);
  CHECK_THROWS_AS(parse_track_spec("lane_width = 3\n"), Error);
  CHECK_THROWS_AS(parse_track_spec("segment straight 0\n"), Error);
  CHECK_THROWS_AS(parse_track_spec("segment arc 2 90\n"), Error);
}

TEST_CASE("presets")
{
  const Track town(preset_track("town"));
  CHECK(sample_reference(town, 1.0).size() == 500);
  for (const char * name : {"heldout-a", "heldout-b", "heldout-c", "calibration", "corridor"}) {
    CHECK_NOTHROW(preset_track(name).validate());
  }
  CHECK_THROWS_AS(preset_track("nowhere"), Error);
}

TEST_CASE("reference poses on a straight track")
{
  const Track t(bare_straight(100.0));
  const auto poses = sample_reference(t, 1.0);
  REQUIRE(poses.size() == 101);
  for (std::size_t i = 0; i < poses.size(); ++i) {
    CHECK(std::abs(poses[i].translation().y()) < 1e-12);
    CHECK(poses[i].translation().x() == doctest::Approx(static_cast<double>(i)));
    CHECK(ground_truth_offset(t, poses[i]) == doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK(ground_truth_offset(t, compose(poses[10], lateral_shift(0.5))) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK_THROWS_AS(sample_reference(t, 0.0), Error);
}

TEST_CASE("full circle headings and curvature")
{
  const double r = 25.0;
  TrackSpec spec = bare_straight(1.0);
  spec.segments = {Segment::arc(r, 2.0 * M_PI)};
  const Track t(spec);
  const auto poses = sample_reference(t, 0.5);
  const double step = 0.5 / r;
  for (std::size_t i = 1; i < poses.size(); ++i) {
    CHECK(std::abs(wrap(heading_of(poses[i]) - heading_of(poses[i - 1]) - step)) < 1e-9);
  }
  const double sweep = step * static_cast<double>(poses.size() - 1);
  CHECK(sweep == doctest::Approx(2.0 * M_PI).epsilon(0.01));
  for (std::size_t i = 1; i + 1 < poses.size(); i += 17) {
    const Eigen::Vector2d a = poses[i - 1].translation().head<2>();
    const Eigen::Vector2d b = poses[i].translation().head<2>();
    const Eigen::Vector2d c = poses[i + 1].translation().head<2>();
    const double ab = (b - a).norm();
    const double bc = (c - b).norm();
    const double ca = (a - c).norm();
    const double cross = (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
    const double kappa = 2.0 * std::abs(cross) / (ab * bc * ca);
    CHECK(std::abs(kappa - 1.0 / r) < 1e-6);
  }
}

TEST_CASE("offset on an arc is distance to the circle")
{
  const double r = 40.0;
  TrackSpec spec = bare_straight(1.0);
  spec.segments = {Segment::arc(r, M_PI / 2.0)};
  const Track t(spec);
  // Left turn from the origin heading +x: the center sits at (0, r).
  const Eigen::Vector2d center(0.0, r);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(0.1, 1.4);
  std::uniform_real_distribution<double> off(-3.0, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double a = ang(rng);
    const double d = r + off(rng);
    const Eigen::Vector2d p = center + d * Eigen::Vector2d(std::sin(a), -std::cos(a));
    const auto coord = t.locate(p);
    REQUIRE(coord.has_value());
    CHECK(coord->offset == doctest::Approx((p - center).norm() - r).epsilon(1e-9));
  }
}

TEST_CASE("ray casts against closed forms")
{
  const CameraIntrinsics intr;
  TrackSpec spec = bare_straight(200.0);
  spec.lane_markings = false;
  const Scene open(spec);
  const auto pose = camera_pose({20.0, 0.0}, 0.0, 1.5);
  const auto frame = render(open, pose, intr);
  CHECK_FALSE(frame.depth.at(320, 96) > 0.0);
  // Ground hit for row v: z = h * fy / (v - cy).
  for (int v : {110, 150, 191}) {
    CHECK(std::abs(frame.depth.at(320, v) - 1.5 * 320.0 / (v - 96.0)) < 1e-9);
  }

  spec.boxes.push_back(BoxFeature{{20.0 + 10.0 + 0.5, 0.0}, 1.0, 2.0, 3.0, 0.0});
  const Scene blocked(spec);
  CHECK(std::abs(render(blocked, pose, intr).depth.at(320, 96) - 10.0) < 1e-9);
}

TEST_CASE("rendered depth lies on scene surfaces")
{
  const CameraIntrinsics intr;
  const Scene scene(preset_track("town"));
  const auto poses = sample_reference(scene.track(), 1.0);
  for (std::size_t k : {0u, 57u, 140u}) {
    const auto frame = render(scene, poses[k], intr);
    const auto pc = unproject(intr, frame.depth);
    REQUIRE(pc.cloud.size() > 1000);
    double worst = 0.0;
    for (std::size_t i = 0; i < pc.cloud.size(); i += 7) {
      worst = std::max(worst, std::abs(scene.surface_distance(poses[k] * pc.cloud.points[i])));
    }
    CHECK(worst < 1e-6);

    // Edge truth only where depth validity or material changes nearby.
    const int w = frame.depth.width;
    const int h = frame.depth.height;
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        if (!frame.edge_truth.at(u, v)) {
          continue;
        }
        const auto m = frame.material[static_cast<std::size_t>(v * w + u)];
        bool change = false;
        for (int dv = -1; dv <= 1 && !change; ++dv) {
          for (int du = -1; du <= 1 && !change; ++du) {
            const int uu = u + du;
            const int vv = v + dv;
            if (uu < 0 || vv < 0 || uu >= w || vv >= h) {
              continue;
            }
            change = frame.material[static_cast<std::size_t>(vv * w + uu)] != m ||
                     std::abs(frame.depth.at(uu, vv) - frame.depth.at(u, v)) > 0.05 * frame.depth.at(u, v);
          }
        }
        CHECK(change);
      }
    }
  }
}

TEST_CASE("pose noise")
{
  const Track t(bare_straight(60.0));
  const auto poses = sample_reference(t, 1.0);
  SUBCASE("zero sigma keeps poses")
  {
    const auto same = perturb(poses, PoseNoiseModel{0.0, 0.0, 3});
    for (std::size_t i = 0; i < poses.size(); ++i) {
      CHECK(max_abs_difference(same[i], poses[i]) == 0.0);
    }
  }
  SUBCASE("translation drift grows like a random walk")
  {
    const double s = 0.01;
    for (std::size_t k : {4u, 16u, 49u}) {
      double sq = 0.0;
      for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        const auto noisy = perturb(poses, PoseNoiseModel{s, 0.0, seed});
        sq += (noisy[k].translation() - poses[k].translation()).squaredNorm();
      }
      const double rms = std::sqrt(sq / 1000.0);
      CHECK(std::abs(rms / (s * std::sqrt(static_cast<double>(k))) - 1.0) < 0.1);
    }
  }
  SUBCASE("default drift over a lookback window stays small")
  {
    double mean = 0.0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      const auto noisy = perturb(poses, PoseNoiseModel{0.01, 0.002, seed});
      const auto rel = relative_transform(noisy[30], noisy[22]);
      const auto truth = relative_transform(poses[30], poses[22]);
      mean += (rel.translation() - truth.translation()).norm() / 200.0;
      const auto & r = noisy[30].rotation();
      CHECK((r.transpose() * r - Eigen::Matrix3d::Identity()).norm() < 1e-12);
    }
    CHECK(mean < 0.1);
    CHECK(mean > 0.0);
  }
  SUBCASE("seeded")
  {
    const auto a = perturb(poses, PoseNoiseModel{0.01, 0.002, 9});
    const auto b = perturb(poses, PoseNoiseModel{0.01, 0.002, 9});
    CHECK(max_abs_difference(a.back(), b.back()) == 0.0);
  }
}

TEST_CASE("camera must stay above ground")
{
  const Scene scene(bare_straight(50.0));
  CHECK_THROWS_AS(render(scene, camera_pose({5.0, 0.0}, 0.0, -0.5), CameraIntrinsics{}), Error);
  CHECK_THROWS_AS(ground_truth_offset(scene.track(), camera_pose({500.0, 0.0}, 0.0, 1.5)), Error);
}
