// Copyright 2026 The ltr Authors
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

#include "ltr/neural.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <utility>

#include "ltr/errors.h"

namespace ltr {

std::string to_string(Activation activation) {
  return activation == Activation::kRelu ? "relu" : "tanh";
}

Activation activation_from_string(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + name + "'");
}

void NetConfig::validate() const {
  if (layer_widths.size() < 2) {
    throw ConfigError("a net needs at least an input and an output width");
  }
  for (int w : layer_widths) {
    if (w < 1) throw ConfigError("layer widths must be >= 1");
  }
}

std::size_t NetConfig::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < layer_widths.size(); ++l) {
    const auto in = static_cast<std::size_t>(layer_widths[l]);
    const auto out = static_cast<std::size_t>(layer_widths[l + 1]);
    count += in * out + out;
  }
  return count;
}

void GradientSet::set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

void GradientSet::scale(double factor) {
  for (double& v : values_) v *= factor;
}

void GradientSet::add(const GradientSet& other) {
  if (other.size() != size()) throw ShapeError("gradient sets differ in size");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
}

double GradientSet::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

FeedForwardNet::FeedForwardNet(NetConfig config) : config_(std::move(config)) {
  config_.validate();
  parameters_.assign(config_.parameter_count(), 0.0);
  compute_offsets();
  std::mt19937_64 rng(config_.init_seed);
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(config_.layer_widths[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : mutable_weights(l)) w = dist(rng);
  }
}

FeedForwardNet FeedForwardNet::from_parameters(NetConfig config,
                                               std::vector<double> parameters) {
  config.validate();
  if (parameters.size() != config.parameter_count()) {
    throw ShapeError("parameter count " + std::to_string(parameters.size()) +
                     " does not match config (" +
                     std::to_string(config.parameter_count()) + ")");
  }
  FeedForwardNet net;
  net.config_ = std::move(config);
  net.parameters_ = std::move(parameters);
  net.compute_offsets();
  return net;
}

void FeedForwardNet::compute_offsets() {
  offsets_.clear();
  std::size_t offset = 0;
  for (std::size_t l = 0; l < num_layers(); ++l) {
    offsets_.push_back(offset);
    const auto in = static_cast<std::size_t>(config_.layer_widths[l]);
    const auto out = static_cast<std::size_t>(config_.layer_widths[l + 1]);
    offset += in * out + out;
  }
}

std::span<const double> FeedForwardNet::weights(std::size_t layer) const {
  const auto in = static_cast<std::size_t>(config_.layer_widths[layer]);
  const auto out = static_cast<std::size_t>(config_.layer_widths[layer + 1]);
  return std::span<const double>(parameters_).subspan(offsets_[layer], in * out);
}

std::span<const double> FeedForwardNet::biases(std::size_t layer) const {
  const auto in = static_cast<std::size_t>(config_.layer_widths[layer]);
  const auto out = static_cast<std::size_t>(config_.layer_widths[layer + 1]);
  return std::span<const double>(parameters_).subspan(offsets_[layer] + in * out, out);
}

std::span<double> FeedForwardNet::mutable_weights(std::size_t layer) {
  const auto in = static_cast<std::size_t>(config_.layer_widths[layer]);
  const auto out = static_cast<std::size_t>(config_.layer_widths[layer + 1]);
  return std::span<double>(parameters_).subspan(offsets_[layer], in * out);
}

std::span<double> FeedForwardNet::mutable_biases(std::size_t layer) {
  const auto in = static_cast<std::size_t>(config_.layer_widths[layer]);
  const auto out = static_cast<std::size_t>(config_.layer_widths[layer + 1]);
  return std::span<double>(parameters_).subspan(offsets_[layer] + in * out, out);
}

void FeedForwardNet::zero_output_layer() {
  const std::size_t last = num_layers() - 1;
  for (double& w : mutable_weights(last)) w = 0.0;
  for (double& b : mutable_biases(last)) b = 0.0;
}

void FeedForwardNet::check_input(std::span<const double> input) const {
  if (static_cast<int>(input.size()) != input_width()) {
    throw ShapeError("net input has width " + std::to_string(input.size()) +
                     ", expected " + std::to_string(input_width()));
  }
}

namespace {

inline double activate(Activation a, double x) {
  return a == Activation::kRelu ? (x > 0.0 ? x : 0.0) : std::tanh(x);
}

// Derivative expressed through the pre-activation value.
inline double activate_derivative(Activation a, double pre) {
  if (a == Activation::kRelu) return pre > 0.0 ? 1.0 : 0.0;
  const double t = std::tanh(pre);
  return 1.0 - t * t;
}

void affine(std::span<const double> w, std::span<const double> b,
            std::span<const double> x, std::vector<double>& out) {
  const std::size_t in = x.size();
  const std::size_t rows = b.size();
  out.resize(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = w.data() + r * in;
    double acc = b[r];
    for (std::size_t c = 0; c < in; ++c) acc += row[c] * x[c];
    out[r] = acc;
  }
}

}  // namespace

std::vector<double> FeedForwardNet::forward(std::span<const double> input) const {
  check_input(input);
  std::vector<double> current(input.begin(), input.end());
  std::vector<double> next;
  const std::size_t layers = num_layers();
  for (std::size_t l = 0; l < layers; ++l) {
    affine(weights(l), biases(l), current, next);
    if (l + 1 < layers) {
      for (double& v : next) v = activate(config_.activation, v);
    }
    std::swap(current, next);
  }
  return current;
}

FeedForwardNet::Trace FeedForwardNet::forward_trace(
    std::span<const double> input) const {
  check_input(input);
  const std::size_t layers = num_layers();
  Trace trace;
  trace.layer_inputs.resize(layers);
  trace.pre_activations.resize(layers);
  trace.layer_inputs[0].assign(input.begin(), input.end());
  for (std::size_t l = 0; l < layers; ++l) {
    affine(weights(l), biases(l), trace.layer_inputs[l], trace.pre_activations[l]);
    if (l + 1 < layers) {
      auto& next = trace.layer_inputs[l + 1];
      next.resize(trace.pre_activations[l].size());
      for (std::size_t i = 0; i < next.size(); ++i) {
        next[i] = activate(config_.activation, trace.pre_activations[l][i]);
      }
    }
  }
  return trace;
}

std::vector<double> FeedForwardNet::backward(const Trace& trace,
                                             std::span<const double> upstream,
                                             GradientSet& grads) const {
  if (static_cast<int>(upstream.size()) != output_width()) {
    throw ShapeError("upstream has width " + std::to_string(upstream.size()) +
                     ", expected " + std::to_string(output_width()));
  }
  if (grads.size() != parameters_.size()) {
    throw ShapeError("gradient set is not congruent with the net");
  }
  if (trace.pre_activations.size() != num_layers()) {
    throw ShapeError("trace does not belong to this net");
  }
  std::vector<double> delta(upstream.begin(), upstream.end());
  std::vector<double> below;
  for (std::size_t l = num_layers(); l-- > 0;) {
    const auto& x = trace.layer_inputs[l];
    const std::size_t in = x.size();
    const std::size_t out = delta.size();
    double* gw = grads.values().data() + offsets_[l];
    double* gb = gw + in * out;
    const auto w = weights(l);
    below.assign(in, 0.0);
    for (std::size_t r = 0; r < out; ++r) {
      const double d = delta[r];
      if (d == 0.0) continue;
      gb[r] += d;
      double* grow = gw + r * in;
      const double* wrow = w.data() + r * in;
      for (std::size_t c = 0; c < in; ++c) {
        grow[c] += d * x[c];
        below[c] += d * wrow[c];
      }
    }
    if (l > 0) {
      const auto& pre = trace.pre_activations[l - 1];
      for (std::size_t c = 0; c < in; ++c) {
        below[c] *= activate_derivative(config_.activation, pre[c]);
      }
    }
    std::swap(delta, below);
  }
  return delta;
}

GradientSet backward(const FeedForwardNet& net, std::span<const double> input,
                     std::span<const double> upstream) {
  GradientSet grads = net.zero_gradients();
  net.backward(net.forward_trace(input), upstream, grads);
  return grads;
}

double sigmoid(double x) {
  if (!std::isfinite(x)) throw NumericError("sigmoid of a non-finite value");
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

std::vector<double> softmax(std::span<const double> values) {
  if (values.empty()) throw ShapeError("softmax of an empty vector");
  const double m = *std::max_element(values.begin(), values.end());
  std::vector<double> out(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::exp(values[i] - m);
    total += out[i];
  }
  for (double& v : out) v /= total;
  return out;
}

std::string to_string(OptimizerAlgorithm algorithm) {
  return algorithm == OptimizerAlgorithm::kSgd ? "sgd" : "adam";
}

OptimizerAlgorithm optimizer_from_string(const std::string& name) {
  if (name == "sgd") return OptimizerAlgorithm::kSgd;
  if (name == "adam") return OptimizerAlgorithm::kAdam;
  throw ConfigError("unknown optimizer '" + name + "'");
}

OptimizerState::OptimizerState(OptimizerAlgorithm algorithm, double learning_rate,
                               std::size_t parameter_count)
    : algorithm(algorithm),
      learning_rate(learning_rate),
      first_moment(parameter_count, 0.0),
      second_moment(parameter_count, 0.0) {
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
}

void optimizer_step(std::span<double> parameters, std::span<const double> grads,
                    OptimizerState& state) {
  if (grads.size() != parameters.size()) {
    throw ShapeError("gradients are not congruent with parameters");
  }
  ++state.step;
  if (state.algorithm == OptimizerAlgorithm::kSgd) {
    for (std::size_t i = 0; i < parameters.size(); ++i) {
      parameters[i] -= state.learning_rate * grads[i];
    }
    return;
  }
  if (state.first_moment.size() != parameters.size() ||
      state.second_moment.size() != parameters.size()) {
    throw ShapeError("optimizer moments are not congruent with parameters");
  }
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(OptimizerState::kBeta1, t);
  const double c2 = 1.0 - std::pow(OptimizerState::kBeta2, t);
  for (std::size_t i = 0; i < parameters.size(); ++i) {
    const double g = grads[i];
    double& m = state.first_moment[i];
    double& v = state.second_moment[i];
    m = OptimizerState::kBeta1 * m + (1.0 - OptimizerState::kBeta1) * g;
    v = OptimizerState::kBeta2 * v + (1.0 - OptimizerState::kBeta2) * g * g;
    const double m_hat = m / c1;
    const double v_hat = v / c2;
    parameters[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + OptimizerState::kEpsilon);
  }
}

void optimizer_step(FeedForwardNet& net, const GradientSet& grads,
                    OptimizerState& state) {
  optimizer_step(net.mutable_parameters(), grads.values(), state);
}

}  // namespace ltr
