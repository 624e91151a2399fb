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

// Dense feed-forward networks with exact reverse-mode gradients.
//
// Every scorer in the library (f, h, phi, psi, the logit network and the
// attention projections) is a FeedForwardNet. Parameters live in a single
// flat buffer laid out layer by layer: the weight matrix in row-major
// (out x in) order followed by the bias vector. Serialization, gradients
// and optimizer state all share this layout.

#ifndef LTR_NEURAL_H_
#define LTR_NEURAL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ltr {

enum class Activation { kRelu, kTanh };

std::string to_string(Activation activation);
Activation activation_from_string(const std::string& name);

struct NetConfig {
  // Input width first, output width last.
  std::vector<int> layer_widths;
  // Applied to hidden layers only; the output layer is linear.
  Activation activation = Activation::kRelu;
  std::uint64_t init_seed = 0;

  // Throws ConfigError unless there are >= 2 widths, all >= 1.
  void validate() const;
  std::size_t parameter_count() const;

  bool operator==(const NetConfig&) const = default;
};

// Same layout as the owning net's parameter buffer.
class GradientSet {
 public:
  GradientSet() = default;
  explicit GradientSet(std::size_t size) : values_(size, 0.0) {}

  std::size_t size() const { return values_.size(); }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  void set_zero();
  void scale(double factor);
  // Throws ShapeError on size mismatch.
  void add(const GradientSet& other);
  double max_abs() const;

 private:
  std::vector<double> values_;
};

class FeedForwardNet {
 public:
  // Intermediate values of one forward pass, kept for backward().
  struct Trace {
    // layer_inputs[l] is the input of layer l; layer_inputs[0] is the net input.
    std::vector<std::vector<double>> layer_inputs;
    // Pre-activation values of each layer; the last entry is the output.
    std::vector<std::vector<double>> pre_activations;

    std::span<const double> output() const { return pre_activations.back(); }
  };

  FeedForwardNet() = default;

  // Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)) from init_seed, biases 0.
  explicit FeedForwardNet(NetConfig config);

  // Throws ShapeError if `parameters` does not match the config.
  static FeedForwardNet from_parameters(NetConfig config,
                                        std::vector<double> parameters);

  const NetConfig& config() const { return config_; }
  std::size_t num_layers() const { return config_.layer_widths.size() - 1; }
  int input_width() const { return config_.layer_widths.front(); }
  int output_width() const { return config_.layer_widths.back(); }
  std::size_t parameter_count() const { return parameters_.size(); }

  std::span<const double> parameters() const { return parameters_; }
  std::span<double> mutable_parameters() { return parameters_; }

  std::span<const double> weights(std::size_t layer) const;
  std::span<const double> biases(std::size_t layer) const;
  std::span<double> mutable_weights(std::size_t layer);
  std::span<double> mutable_biases(std::size_t layer);

  // Zeroes the last layer's weights and biases, so the net outputs 0.
  void zero_output_layer();

  std::vector<double> forward(std::span<const double> input) const;
  Trace forward_trace(std::span<const double> input) const;

  // Accumulates d(upstream . output)/d(params) into `grads` and returns the
  // gradient with respect to the input.
  std::vector<double> backward(const Trace& trace,
                               std::span<const double> upstream,
                               GradientSet& grads) const;

  GradientSet zero_gradients() const { return GradientSet(parameters_.size()); }

 private:
  void compute_offsets();
  void check_input(std::span<const double> input) const;

  NetConfig config_;
  std::vector<double> parameters_;
  // Offset of each layer's weight block; its biases follow the weights.
  std::vector<std::size_t> offsets_;
};

// Gradient of (upstream . forward(input)) with respect to every parameter.
GradientSet backward(const FeedForwardNet& net, std::span<const double> input,
                     std::span<const double> upstream);

// Logistic function; throws NumericError on non-finite input.
double sigmoid(double x);
// log(1 + e^x) without overflow.
double softplus(double x);
// Max-subtracted softmax; throws ShapeError on empty input.
std::vector<double> softmax(std::span<const double> values);

enum class OptimizerAlgorithm { kSgd, kAdam };

std::string to_string(OptimizerAlgorithm algorithm);
OptimizerAlgorithm optimizer_from_string(const std::string& name);

struct OptimizerState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  OptimizerState() = default;
  OptimizerState(OptimizerAlgorithm algorithm, double learning_rate,
                 std::size_t parameter_count);

  OptimizerAlgorithm algorithm = OptimizerAlgorithm::kAdam;
  double learning_rate = 1e-3;
  std::vector<double> first_moment;
  std::vector<double> second_moment;
  std::int64_t step = 0;
};

// sgd: p -= lr * g. adam: bias-corrected moment update.
// Throws ShapeError when the three buffers are not congruent.
void optimizer_step(std::span<double> parameters, std::span<const double> grads,
                    OptimizerState& state);
void optimizer_step(FeedForwardNet& net, const GradientSet& grads,
                    OptimizerState& state);

}  // namespace ltr

#endif  // LTR_NEURAL_H_
