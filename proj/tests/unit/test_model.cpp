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
#include "lanesynth/labeling.hpp"
#include "lanesynth/model.hpp"
#include "../oracles.hpp"
#include "../test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace lanesynth;

namespace
{

ModelConfig small_config()
{
  ModelConfig cfg;
  cfg.point_widths = {8, 16};
  cfg.head_widths = {8};
  return cfg;
}

}  // namespace

TEST_CASE("config validation and parameter count")
{
  ModelConfig cfg = small_config();
  const PointNetLite net(cfg, 1);
  // 3->8, 8->16, 16->8, 8->1 with biases.
  CHECK(net.parameter_count() == (3 * 8 + 8) + (8 * 16 + 16) + (16 * 8 + 8) + (8 + 1));
  cfg.point_widths = {8, 0};
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = small_config();
  cfg.output_scale = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("forward is bounded and rejects bad input")
{
  const PointNetLite net(small_config(), 2);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    const double y = net.forward(lanesynth::testing::random_cloud(rng, 50, 500.0));
    CHECK(std::abs(y) <= 3.0);
  }
  CHECK_THROWS_AS(net.forward(PointCloud{}), Error);
  PointCloud bad;
  bad.points = {{0.0, std::nan(""), 1.0}};
  CHECK_THROWS_AS(net.forward(bad), Error);
}

TEST_CASE("analytic gradient matches central differences")
{
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 4; ++trial) {
    PointNetLite net(small_config(), 100 + static_cast<std::uint64_t>(trial));
    const auto pts = lanesynth::testing::random_points(rng, 24);
    const auto r = lanesynth::testing::gradient_check(net, pts, 0.4 * trial - 0.6);
    CHECK(r.checked > net.parameter_count() / 2);
    CHECK(r.worst_relative < 1e-4);
  }
}

TEST_CASE("permutation invariance")
{
  const PointNetLite net(small_config(), 5);
  std::mt19937_64 rng(6);
  auto cloud = lanesynth::testing::random_cloud(rng, 64);
  const double y = net.forward(cloud);
  for (int i = 0; i < 20; ++i) {
    std::shuffle(cloud.points.begin(), cloud.points.end(), rng);
    CHECK(std::abs(net.forward(cloud) - y) <= 1e-12);
  }
}

TEST_CASE("training fits a simple target")
{
  // Label is the mean lateral position of a blob of points.
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> off(-1.5, 1.5);
  std::normal_distribution<double> n(0.0, 0.3);
  std::vector<LabeledSample> data;
  for (int i = 0; i < 200; ++i) {
    LabeledSample s;
    s.delta_x = off(rng);
    for (int k = 0; k < 32; ++k) {
      s.cloud.points.emplace_back(s.delta_x + n(rng), n(rng), 5.0 + n(rng));
    }
    data.push_back(std::move(s));
  }
  PointNetLite net(small_config(), 8);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.batch_size = 16;
  cfg.seed = 9;
  const auto result = train(net, data, cfg);
  REQUIRE(result.history.size() == 30);
  CHECK(result.history.back().train_mse < 0.5 * result.history.front().train_mse);
  CHECK(result.history.back().validation_mse < 0.1);
  const auto csv = format_loss_history(result.history);
  CHECK(csv.rfind("epoch,steps,train_mse,validation_mse\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 31);

  PointNetLite again(small_config(), 8);
  train(again, data, cfg);
  CHECK(again.parameters() == net.parameters());
}

TEST_CASE("step budget overrides epochs")
{
  std::vector<LabeledSample> data(10);
  for (auto & s : data) {
    s.cloud.points = {{0.0, 0.0, 1.0}, {1.0, 0.0, 2.0}};
  }
  PointNetLite net(small_config(), 1);
  TrainConfig cfg;
  cfg.batch_size = 4;
  cfg.max_steps = 7;
  cfg.validation_fraction = 0.0;
  const auto r = train(net, data, cfg);
  CHECK(r.steps == 7);
  CHECK_THROWS_AS(train(net, {}, cfg), Error);
  cfg.learning_rate = -1.0;
  CHECK_THROWS_AS(train(net, data, cfg), Error);
}

TEST_CASE("checkpoint round trip and failures")
{
  lanesynth::testing::TempDir dir("ckpt");
  Checkpoint c;
  c.net = PointNetLite(small_config(), 11);
  c.metadata["cloud.max_distance"] = "20";
  save_checkpoint(dir / "m.lsnn", c);
  const auto back = load_checkpoint(dir / "m.lsnn");
  CHECK(back.net.parameters() == c.net.parameters());
  CHECK(back.net.config().point_widths == c.net.config().point_widths);
  CHECK(back.metadata == c.metadata);

  std::string bytes = serialize_checkpoint(c);
  std::string wrong_version = bytes;
  wrong_version[4] = static_cast<char>(wrong_version[4] + 1);
  try {
    deserialize_checkpoint(wrong_version);
    FAIL("expected a version error");
  } catch (const Error & e) {
    CHECK(e.code() == ErrorCode::kIncompatibleVersion);
  }
  CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), Error);
  CHECK_THROWS_AS(deserialize_checkpoint(bytes + "x"), Error);
  CHECK_THROWS_AS(deserialize_checkpoint("LSNX"), Error);
  CHECK_THROWS_AS(load_checkpoint(dir / "missing.lsnn"), Error);
}

TEST_CASE("results do not depend on heap layout")
{
  const PointNetLite net(small_config(), 8);
  std::mt19937_64 rng(9);
  const auto pts = lanesynth::testing::random_points(rng, 40);
  ParameterVector g0;
  net.backward(pts, 0.3, g0);
  std::vector<std::vector<char>> junk;
  for (int k = 1; k < 24; ++k) {
    junk.emplace_back(static_cast<std::size_t>(8 * (k % 5 + 1)));
    const PointNetLite copy = net;
    ParameterVector g;
    copy.backward(pts, 0.3, g);
    CHECK(g == g0);
  }
}
