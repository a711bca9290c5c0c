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
#include "lanesynth/io.hpp"
#include "lanesynth/pose_io.hpp"
#include "../test_util.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace lanesynth;
using lanesynth::testing::TempDir;

TEST_CASE("TUM round trip")
{
  std::mt19937_64 rng(5);
  std::vector<StampedPose> poses;
  for (int i = 0; i < 20; ++i) {
    poses.push_back(StampedPose{0.1 * i, lanesynth::testing::random_transform(rng)});
  }
  std::stringstream ss;
  write_tum(ss, poses);
  const auto back = read_tum(ss);
  REQUIRE(back.size() == poses.size());
  for (std::size_t i = 0; i < poses.size(); ++i) {
    CHECK(back[i].timestamp == doctest::Approx(poses[i].timestamp));
    CHECK(max_abs_difference(back[i].pose, poses[i].pose) < 1e-14);
  }
}

TEST_CASE("TUM reader skips comments and reports bad lines")
{
  std::istringstream ok("# header\n\n1.0 0 0 0 0 0 0 1\n");
  CHECK(read_tum(ok).size() == 1);
  std::istringstream short_line("1.0 0 0 0 0 0 1\n");
  CHECK_THROWS_AS(read_tum(short_line), Error);
  std::istringstream text("# c\n1.0 0 0 0 0 0 0 x\n");
  try {
    read_tum(text);
    FAIL("expected a parse error");
  } catch (const Error & e) {
    CHECK(e.code() == ErrorCode::kParse);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(read_tum(std::filesystem::path("/nonexistent/poses.txt")), Error);
}

TEST_CASE("PLY ascii and binary round trips")
{
  TempDir dir("ply");
  std::mt19937_64 rng(6);
  const auto cloud = lanesynth::testing::random_cloud(rng, 300);
  for (auto fmt : {PlyFormat::kAscii, PlyFormat::kBinaryLittleEndian}) {
    const auto path = dir / (fmt == PlyFormat::kAscii ? "a.ply" : "b.ply");
    write_ply(path, cloud, fmt);
    const auto back = read_ply(path);
    REQUIRE(back.size() == cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
      // Coordinates are stored as float32.
      CHECK(back.points[i] == cloud.points[i].cast<float>().cast<double>());
    }
  }
}

TEST_CASE("PLY reader accepts float vertices with extra properties")
{
  TempDir dir("plyf");
  const auto path = dir / "f.ply";
  {
    std::ofstream out(path);
    out << "ply\nformat ascii 1.0\ncomment test\nelement vertex 2\nproperty float x\nproperty float y\n"
           "property float z\nproperty uchar red\nend_header\n1 2 3 255\n4 5 6 0\n";
  }
  const auto c = read_ply(path);
  REQUIRE(c.size() == 2);
  CHECK(c.points[1].y() == 5.0);
}

TEST_CASE("PLY reader rejects garbage")
{
  TempDir dir("plyg");
  const auto path = dir / "g.ply";
  {
    std::ofstream out(path);
    out << "not a ply\n";
  }
  CHECK_THROWS_AS(read_ply(path), Error);
  {
    std::ofstream out(path);
    out << "ply\nformat binary_little_endian 1.0\nelement vertex 5\nproperty double x\nproperty double y\n"
           "property double z\nend_header\n";
  }
  CHECK_THROWS_AS(read_ply(path), Error);
}

TEST_CASE("depth map and PGM round trips")
{
  TempDir dir("raster");
  DepthMap d{4, 3, {}};
  for (int i = 0; i < 12; ++i) {
    d.values.push_back(i % 5 == 0 ? 0.0 : 1.25 * i);
  }
  write_depth_map(dir / "d.dmap", d);
  const auto dd = read_depth_map(dir / "d.dmap");
  CHECK(dd.width == 4);
  CHECK(dd.values == d.values);

  GrayImage g{3, 2, {0.0f, 0.5f, 1.0f, 0.25f, 0.75f, 1.0f}};
  write_pgm(dir / "g.pgm", g);
  const auto gg = read_pgm(dir / "g.pgm");
  REQUIRE(gg.values.size() == g.values.size());
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    CHECK(std::abs(gg.values[i] - g.values[i]) <= 0.5f / 255.0f + 1e-6f);
  }
}

TEST_CASE("atomic write replaces content")
{
  TempDir dir("atomic");
  write_file_atomic(dir / "x.txt", "one");
  write_file_atomic(dir / "x.txt", "two");
  CHECK(read_file(dir / "x.txt") == "two");
  CHECK_THROWS_AS(read_file(dir / "missing.txt"), Error);
}
