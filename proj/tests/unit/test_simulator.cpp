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

#include "lanesynth/error.hpp"
#include "lanesynth/simulator.hpp"
#include "lanesynth/synthworld.hpp"

#include <doctest.h>

#include <cmath>

using namespace lanesynth;

namespace
{

TrackSpec straight_spec(double length)
{
  TrackSpec spec;
  spec.segments = {Segment::straight(length)};
  return spec;
}

}  // namespace

TEST_CASE("kinematic step")
{
  VehicleState s;
  s.heading = 0.3;
  const auto next = step(s, 0.0, 0.1);
  CHECK(next.heading == s.heading);
  CHECK(next.position.x() == doctest::Approx(std::cos(0.3)));
  CHECK(next.position.y() == doctest::Approx(std::sin(0.3)));
  CHECK(next.speed == s.speed);
}

TEST_CASE("constant steering traces the bicycle-model circle")
{
  const double delta = 0.1;
  VehicleState s;
  s.speed = 5.0;
  const double radius = s.wheelbase / std::tan(delta);
  Eigen::Vector2d center(0.0, radius);  // left turn from heading 0
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    s = step(s, delta, 0.001);
    worst = std::max(worst, std::abs((s.position - center).norm() - radius) / radius);
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("lane membership")
{
  const Track track(straight_spec(100.0));
  VehicleState s;
  s.position = {50.0, 0.0};
  CHECK(on_lane(track, s));
  s.position = {50.0, -track.spec().lane_width};
  CHECK_FALSE(on_lane(track, s));
  // Right corners just inside the lane edge.
  s.position = {50.0, -(track.spec().lane_width - s.width) / 2.0 + 1e-3};
  CHECK(on_lane(track, s));
  s.position.y() -= 2e-3;
  CHECK_FALSE(on_lane(track, s));
  s.position = {200.0, 0.0};
  CHECK_FALSE(on_lane(track, s));
}

TEST_CASE("steering perturbation")
{
  std::mt19937_64 a(1);
  CHECK(perturb_steering(0.2, 0.0, 0.5, a) == 0.2);
  for (int i = 0; i < 500; ++i) {
    const double x = perturb_steering(0.0, 0.1, 0.5, a);
    CHECK(std::abs(x) <= 0.05);
  }
  std::mt19937_64 c(9);
  std::mt19937_64 d(9);
  CHECK(perturb_steering(0.1, 0.05, 0.5, c) == perturb_steering(0.1, 0.05, 0.5, d));
}

TEST_CASE("steer_toward sign convention")
{
  // Positive offsets lie to the right; positive steering turns left.
  CHECK(steer_toward(1.0, 0.5) < 0.0);
  CHECK(steer_toward(0.0, 0.5) == 0.0);
  CHECK(steer_toward(-1.0, 0.5) == -steer_toward(1.0, 0.5));
}

TEST_CASE("oracle keeps the lane")
{
  const CameraIntrinsics intr;
  const Scene straight(straight_spec(200.0));
  const OracleController oracle(SteeringParams{0.16, 5.0});
  EpisodeConfig cfg;
  cfg.start_s = 10.0;
  const auto r = run_episode(straight, intr, oracle, cfg);
  CHECK(r.ratio_on_lane == 1.0);
  CHECK(r.on_lane.size() == 135);
  CHECK_FALSE(r.terminated_early);

  cfg.start_offset = 0.8;
  const auto recovered = run_episode(straight, intr, oracle, cfg);
  CHECK(std::abs(recovered.offsets.back()) < 0.1);

  const Scene town(preset_track("town"));
  for (const auto & s : spread_starts("town", town.track(), 3, 135.0)) {
    cfg.start_s = s.s;
    cfg.start_offset = 0.0;
    CHECK(run_episode(town, intr, oracle, cfg).ratio_on_lane == 1.0);
  }
}

TEST_CASE("collision halts the vehicle")
{
  const CameraIntrinsics intr;
  const Scene scene(preset_track("calibration"));
  const ConstantController straight_ahead(0.0);
  EpisodeConfig cfg;
  cfg.start_s = 20.0;
  const auto r = run_episode(scene, intr, straight_ahead, cfg);
  CHECK(r.terminated_early);
  CHECK(r.termination == "collision");
  CHECK(r.ratio_on_lane < 1.0);
  CHECK(r.on_lane.back() == 0);
}

TEST_CASE("episodes are deterministic under a seed")
{
  const CameraIntrinsics intr;
  const Scene scene(preset_track("heldout-a"));
  const OracleController oracle(SteeringParams{0.16, 5.0});
  EpisodeConfig cfg;
  cfg.start_s = 15.0;
  cfg.perturbation = 0.1;
  cfg.seed = 77;
  const auto a = run_episode(scene, intr, oracle, cfg);
  const auto b = run_episode(scene, intr, oracle, cfg);
  REQUIRE(a.path.size() == b.path.size());
  for (std::size_t i = 0; i < a.path.size(); ++i) {
    CHECK(a.path[i].position == b.path[i].position);
  }
  cfg.seed = 78;
  const auto c = run_episode(scene, intr, oracle, cfg);
  CHECK(c.path.back().position != a.path.back().position);
}

TEST_CASE("episode config validation")
{
  EpisodeConfig cfg;
  cfg.frames = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = EpisodeConfig{};
  cfg.perturbation = -0.1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = EpisodeConfig{};
  cfg.speed = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("start positions")
{
  const Track t(straight_spec(300.0));
  const auto s = spread_starts("t", t, 5, 135.0);
  REQUIRE(s.size() == 5);
  CHECK(s.front().s == 10.0);
  CHECK(s.back().s == doctest::Approx(300.0 - 135.0 - 10.0));
  CHECK(s[2].start_idx == 2);
  CHECK_THROWS_AS(spread_starts("t", Track(straight_spec(100.0)), 2, 135.0), Error);
  CHECK_THROWS_AS(spread_starts("t", t, 0, 135.0), Error);
}

TEST_CASE("sweep report")
{
  const CameraIntrinsics intr;
  const Scene scene(straight_spec(200.0));
  const OracleController oracle(SteeringParams{0.16, 5.0});
  const ConstantController drift(0.02, "drift");
  SweepSpec spec;
  spec.tracks = {{"straight", &scene}};
  spec.starts = spread_starts("straight", scene.track(), 2, 135.0);
  spec.controllers = {&oracle, &drift};
  spec.perturbations = {0.0, 0.1};
  spec.jobs = 2;
  const auto rows = sweep(spec, intr);
  CHECK(rows.size() == 8);
  CHECK(mean_ratio(rows, "oracle", 0.0) == 1.0);
  CHECK(mean_ratio(rows, "drift", 0.0) < 1.0);
  const auto csv = format_report_csv(rows);
  CHECK(csv.rfind("controller,track,start_idx,perturbation,ratio_on_lane,frames,terminated_early\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 9);
  const auto summary = summarize(rows);
  CHECK(summary.size() == 4);
  CHECK(format_summary_csv(summary).find("oracle") != std::string::npos);

  const auto svg = render_bev_svg(scene.track(), rows.front().episode);
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("circle") != std::string::npos);
}

TEST_CASE("alpha calibration and log grid")
{
  const auto grid = log_space(0.02, 2.0, 5);
  REQUIRE(grid.size() == 5);
  CHECK(grid.front() == doctest::Approx(0.02));
  CHECK(grid[2] == doctest::Approx(0.2));
  CHECK(grid.back() == doctest::Approx(2.0));

  const CameraIntrinsics intr;
  const Scene scene(preset_track("calibration"));
  EpisodeConfig cfg;
  cfg.frames = 60;
  const auto c = calibrate_alpha(scene, intr, {0.001, 0.16}, 5.0, 2, cfg);
  CHECK(c.alpha == 0.16);
  CHECK(c.ratios.size() == 2);
  CHECK(c.ratios[1] >= c.ratios[0]);
}
