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

#include "lanesynth/model.hpp"

#include "lanesynth/error.hpp"
#include "lanesynth/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

namespace lanesynth
{

static_assert(std::endian::native == std::endian::little, "little-endian host required");

void ModelConfig::validate() const
{
  for (int w : point_widths) {
    if (w <= 0) {
      fail(ErrorCode::kConfiguration, "point layer widths must be positive");
    }
  }
  for (int w : head_widths) {
    if (w <= 0) {
      fail(ErrorCode::kConfiguration, "head layer widths must be positive");
    }
  }
  if (!(output_scale > 0.0) || !std::isfinite(output_scale)) {
    fail(ErrorCode::kConfiguration, "output scale must be positive");
  }
  if (!(input_scale > 0.0) || !std::isfinite(input_scale)) {
    fail(ErrorCode::kConfiguration, "input scale must be positive");
  }
}

PointNetLite::PointNetLite(ModelConfig cfg, std::uint64_t seed) : cfg_(std::move(cfg))
{
  cfg_.validate();
  std::size_t offset = 0;
  int in = 3;
  for (int w : cfg_.point_widths) {
    point_layers_.push_back(Layer{in, w, offset});
    offset += static_cast<std::size_t>(in * w + w);
    in = w;
  }
  std::vector<int> head = cfg_.head_widths;
  head.push_back(1);
  for (int w : head) {
    head_layers_.push_back(Layer{in, w, offset});
    offset += static_cast<std::size_t>(in * w + w);
    in = w;
  }
  params_.assign(offset, 0.0);

  std::mt19937_64 rng(seed);
  auto init = [&](const Layer & l, double bound) {
    std::uniform_real_distribution<double> u(-bound, bound);
    for (int i = 0; i < l.in * l.out; ++i) {
      params_[l.offset + static_cast<std::size_t>(i)] = u(rng);
    }
    std::uniform_real_distribution<double> ub(-1.0 / std::sqrt(l.in), 1.0 / std::sqrt(l.in));
    for (int i = 0; i < l.out; ++i) {
      params_[l.offset + static_cast<std::size_t>(l.in * l.out + i)] = ub(rng);
    }
  };
  for (const auto & l : point_layers_) {
    init(l, std::sqrt(6.0 / l.in));
  }
  for (std::size_t i = 0; i < head_layers_.size(); ++i) {
    const auto & l = head_layers_[i];
    init(l, i + 1 < head_layers_.size() ? std::sqrt(6.0 / l.in) : 1.0 / std::sqrt(l.in));
  }
}

Eigen::Map<const Eigen::MatrixXd> PointNetLite::weight(const Layer & l) const
{
  return Eigen::Map<const Eigen::MatrixXd>(params_.data() + l.offset, l.out, l.in);
}

Eigen::Map<const Eigen::VectorXd> PointNetLite::bias(const Layer & l) const
{
  return Eigen::Map<const Eigen::VectorXd>(
    params_.data() + l.offset + static_cast<std::size_t>(l.in * l.out), l.out);
}

Eigen::Matrix3Xd to_matrix(const PointCloud & cloud)
{
  Eigen::Matrix3Xd m(3, static_cast<Eigen::Index>(cloud.size()));
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    m.col(static_cast<Eigen::Index>(i)) = cloud.points[i];
  }
  return m;
}

double PointNetLite::forward(const Eigen::Matrix3Xd & points, ForwardCache & cache) const
{
  if (params_.empty()) {
    fail(ErrorCode::kInvalidArgument, "model has no parameters");
  }
  if (points.cols() == 0) {
    fail(ErrorCode::kInvalidInput, "empty point cloud");
  }
  if (!points.allFinite()) {
    fail(ErrorCode::kInvalidInput, "non-finite point coordinates");
  }
  cache.input = points * cfg_.input_scale;
  cache.point_act.resize(point_layers_.size());
  const Eigen::MatrixXd * x = &cache.input;
  for (std::size_t i = 0; i < point_layers_.size(); ++i) {
    const auto & l = point_layers_[i];
    Eigen::MatrixXd & a = cache.point_act[i];
    a.noalias() = weight(l) * *x;
    a.colwise() += bias(l);
    a = a.cwiseMax(0.0);
    x = &a;
  }

  const Eigen::Index features = x->rows();
  const Eigen::Index n = x->cols();
  cache.pooled = x->col(0);
  cache.argmax.assign(static_cast<std::size_t>(features), 0);
  for (Eigen::Index p = 1; p < n; ++p) {
    for (Eigen::Index f = 0; f < features; ++f) {
      const double v = (*x)(f, p);
      if (v > cache.pooled[f]) {
        cache.pooled[f] = v;
        cache.argmax[static_cast<std::size_t>(f)] = p;
      }
    }
  }

  cache.head_act.resize(head_layers_.size());
  const Eigen::VectorXd * h = &cache.pooled;
  for (std::size_t i = 0; i < head_layers_.size(); ++i) {
    const auto & l = head_layers_[i];
    Eigen::VectorXd & a = cache.head_act[i];
    a.noalias() = weight(l) * *h;
    a += bias(l);
    if (i + 1 < head_layers_.size()) {
      a = a.cwiseMax(0.0);
    }
    h = &a;
  }
  cache.z = (*h)[0];
  cache.output = cfg_.output_scale * std::tanh(cache.z);
  return cache.output;
}

double PointNetLite::forward(const PointCloud & cloud) const
{
  ForwardCache cache;
  return forward(to_matrix(cloud), cache);
}

double PointNetLite::backward(
  const Eigen::Matrix3Xd & points, double label, ParameterVector & grad) const
{
  thread_local ForwardCache cache;
  const double pred = forward(points, cache);
  if (grad.size() != params_.size()) {
    grad.assign(params_.size(), 0.0);
  }
  auto dweight = [&](const Layer & l) {
    return Eigen::Map<Eigen::MatrixXd>(grad.data() + l.offset, l.out, l.in);
  };
  auto dbias = [&](const Layer & l) {
    return Eigen::Map<Eigen::VectorXd>(
      grad.data() + l.offset + static_cast<std::size_t>(l.in * l.out), l.out);
  };

  const double t = std::tanh(cache.z);
  Eigen::VectorXd g(1);
  g[0] = 2.0 * (pred - label) * cfg_.output_scale * (1.0 - t * t);
  for (std::size_t i = head_layers_.size(); i-- > 0;) {
    const auto & l = head_layers_[i];
    const Eigen::VectorXd & in = i == 0 ? cache.pooled : cache.head_act[i - 1];
    dweight(l).noalias() += g * in.transpose();
    dbias(l) += g;
    Eigen::VectorXd prev = weight(l).transpose() * g;
    if (i > 0) {
      prev = prev.cwiseProduct((in.array() > 0.0).cast<double>().matrix());
    }
    g = std::move(prev);
  }
  if (point_layers_.empty()) {
    return squared_error(pred, label);
  }

  // Only the points that won at least one pooled feature receive gradient.
  std::vector<Eigen::Index> selected(cache.argmax);
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  const auto m = static_cast<Eigen::Index>(selected.size());
  auto column_of = [&](Eigen::Index p) {
    return static_cast<Eigen::Index>(
      std::lower_bound(selected.begin(), selected.end(), p) - selected.begin());
  };

  const Eigen::MatrixXd & last = cache.point_act.back();
  Eigen::MatrixXd gm = Eigen::MatrixXd::Zero(last.rows(), m);
  for (Eigen::Index f = 0; f < last.rows(); ++f) {
    const Eigen::Index p = cache.argmax[static_cast<std::size_t>(f)];
    if (last(f, p) > 0.0) {
      gm(f, column_of(p)) += g[f];
    }
  }
  for (std::size_t i = point_layers_.size(); i-- > 0;) {
    const auto & l = point_layers_[i];
    const Eigen::MatrixXd & src = i == 0 ? cache.input : cache.point_act[i - 1];
    Eigen::MatrixXd in(src.rows(), m);
    for (Eigen::Index c = 0; c < m; ++c) {
      in.col(c) = src.col(selected[static_cast<std::size_t>(c)]);
    }
    dweight(l).noalias() += gm * in.transpose();
    dbias(l) += gm.rowwise().sum();
    if (i > 0) {
      Eigen::MatrixXd prev = weight(l).transpose() * gm;
      gm = prev.cwiseProduct((in.array() > 0.0).cast<double>().matrix());
    }
  }
  return squared_error(pred, label);
}

double PointNetLite::backward(const PointCloud & cloud, double label, ParameterVector & grad) const
{
  return backward(to_matrix(cloud), label, grad);
}

double squared_error(double pred, double label)
{
  const double d = pred - label;
  return d * d;
}

double mean_squared_error(const std::vector<double> & pred, const std::vector<double> & label)
{
  if (pred.size() != label.size()) {
    fail(ErrorCode::kInvalidArgument, "prediction and label counts differ");
  }
  if (pred.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    sum += squared_error(pred[i], label[i]);
  }
  return sum / static_cast<double>(pred.size());
}

void TrainConfig::validate() const
{
  if (!(learning_rate > 0.0) || batch_size <= 0 || epochs <= 0 || max_steps < 0) {
    fail(ErrorCode::kConfiguration, "learning rate, batch size and epochs must be positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0) || !(grad_clip >= 0.0)) {
    fail(ErrorCode::kConfiguration, "momentum must lie in [0, 1) and grad_clip be >= 0");
  }
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    fail(ErrorCode::kConfiguration, "validation fraction must lie in [0, 1)");
  }
}

TrainResult train(
  PointNetLite & net, const std::vector<LabeledSample> & data, const TrainConfig & cfg,
  const EpochCallback & on_epoch)
{
  cfg.validate();
  if (data.empty()) {
    fail(ErrorCode::kConfiguration, "training dataset is empty");
  }
  std::vector<Eigen::Matrix3Xd> inputs;
  inputs.reserve(data.size());
  for (const auto & s : data) {
    inputs.push_back(to_matrix(s.cloud));
  }

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * static_cast<double>(data.size())));
  n_val = std::min(n_val, data.size() - 1);
  const std::vector<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  std::vector<std::size_t> tr(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());

  auto & params = net.parameters();
  std::vector<double> velocity(params.size(), 0.0);
  ParameterVector grad(params.size(), 0.0);
  ForwardCache cache;
  TrainResult result;
  for (int epoch = 1;; ++epoch) {
    if (cfg.max_steps > 0 ? result.steps >= cfg.max_steps : epoch > cfg.epochs) {
      break;
    }
    std::shuffle(tr.begin(), tr.end(), rng);
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t start = 0; start < tr.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      if (cfg.max_steps > 0 && result.steps >= cfg.max_steps) {
        break;
      }
      const std::size_t end = std::min(tr.size(), start + static_cast<std::size_t>(cfg.batch_size));
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        loss_sum += net.backward(inputs[tr[k]], data[tr[k]].delta_x, grad);
      }
      seen += end - start;
      const double inv = 1.0 / static_cast<double>(end - start);
      double norm2 = 0.0;
      for (double & gi : grad) {
        gi *= inv;
        norm2 += gi * gi;
      }
      double scale = 1.0;
      if (cfg.grad_clip > 0.0 && norm2 > cfg.grad_clip * cfg.grad_clip) {
        scale = cfg.grad_clip / std::sqrt(norm2);
      }
      for (std::size_t i = 0; i < params.size(); ++i) {
        velocity[i] = cfg.momentum * velocity[i] - cfg.learning_rate * scale * grad[i];
        params[i] += velocity[i];
      }
      ++result.steps;
    }
    EpochStats stats;
    stats.epoch = epoch;
    stats.steps = result.steps;
    stats.train_mse = seen ? loss_sum / static_cast<double>(seen) : 0.0;
    stats.validation_mse = std::numeric_limits<double>::quiet_NaN();
    if (!val.empty()) {
      double sum = 0.0;
      for (std::size_t k : val) {
        sum += squared_error(net.forward(inputs[k], cache), data[k].delta_x);
      }
      stats.validation_mse = sum / static_cast<double>(val.size());
    }
    result.history.push_back(stats);
    if (on_epoch) {
      on_epoch(stats);
    }
  }
  return result;
}

std::string format_loss_history(const std::vector<EpochStats> & history)
{
  std::string out = "epoch,steps,train_mse,validation_mse\n";
  char line[128];
  for (const auto & e : history) {
    std::snprintf(
      line, sizeof(line), "%d,%lld,%.17g,%.17g\n", e.epoch, static_cast<long long>(e.steps),
      e.train_mse, e.validation_mse);
    out += line;
  }
  return out;
}

namespace
{

template <typename T>
void put(std::string & out, T v)
{
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

void put_string(std::string & out, const std::string & s)
{
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out += s;
}

class Reader
{
public:
  explicit Reader(const std::string & bytes) : bytes_(bytes) {}

  template <typename T>
  T get()
  {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string get_string()
  {
    const auto n = get<std::uint32_t>();
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == bytes_.size(); }

private:
  void need(std::size_t n) const
  {
    if (bytes_.size() - pos_ < n) {
      fail(ErrorCode::kParse, "checkpoint is truncated");
    }
  }
  const std::string & bytes_;
  std::size_t pos_{0};
};

}  // namespace

std::string serialize_checkpoint(const Checkpoint & ckpt)
{
  const ModelConfig & c = ckpt.net.config();
  std::string out = "LSNN";
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.point_widths.size()));
  for (int w : c.point_widths) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(w));
  }
  put<std::uint32_t>(out, static_cast<std::uint32_t>(c.head_widths.size()));
  for (int w : c.head_widths) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(w));
  }
  put<double>(out, c.output_scale);
  put<double>(out, c.input_scale);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(ckpt.metadata.size()));
  for (const auto & [k, v] : ckpt.metadata) {
    put_string(out, k);
    put_string(out, v);
  }
  put<std::uint64_t>(out, ckpt.net.parameter_count());
  for (double p : ckpt.net.parameters()) {
    put<double>(out, p);
  }
  return out;
}

Checkpoint deserialize_checkpoint(const std::string & bytes)
{
  if (bytes.compare(0, 4, "LSNN") != 0) {
    fail(ErrorCode::kParse, "not a model checkpoint");
  }
  const std::string body = bytes.substr(4);
  Reader r(body);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    fail(
      ErrorCode::kIncompatibleVersion,
      "checkpoint version " + std::to_string(version) + " is not supported (expected " +
        std::to_string(kCheckpointVersion) + ")");
  }
  ModelConfig c;
  auto widths = [&] {
    std::vector<int> w(r.get<std::uint32_t>());
    if (w.size() > 64) {
      fail(ErrorCode::kParse, "implausible layer count in checkpoint");
    }
    for (int & x : w) {
      x = static_cast<int>(r.get<std::uint32_t>());
    }
    return w;
  };
  c.point_widths = widths();
  c.head_widths = widths();
  c.output_scale = r.get<double>();
  c.input_scale = r.get<double>();
  Checkpoint ckpt;
  const auto entries = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < entries; ++i) {
    std::string k = r.get_string();
    ckpt.metadata[k] = r.get_string();
  }
  ckpt.net = PointNetLite(c, 0);
  const auto count = r.get<std::uint64_t>();
  if (count != ckpt.net.parameter_count()) {
    fail(ErrorCode::kParse, "checkpoint parameter count does not match its layer sizes");
  }
  for (double & p : ckpt.net.parameters()) {
    p = r.get<double>();
    if (!std::isfinite(p)) {
      fail(ErrorCode::kParse, "checkpoint holds non-finite parameters");
    }
  }
  if (!r.done()) {
    fail(ErrorCode::kParse, "trailing bytes in checkpoint");
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path & path, const Checkpoint & ckpt)
{
  write_file_atomic(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path & path)
{
  return deserialize_checkpoint(read_file(path));
}

}  // namespace lanesynth
