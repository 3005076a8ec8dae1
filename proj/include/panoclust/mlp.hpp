#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "panoclust/rng.hpp"

namespace panoclust {

struct AffineLayer {
  int in = 0;
  int out = 0;
  std::vector<double> weights;  // out x in, row-major
  std::vector<double> biases;   // out
};

// Small dense MLP: affine layers with a rectifier between them and no
// activation after the last layer. Gradients are computed manually.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<AffineLayer> layers);

  int input_dim() const { return layers_.empty() ? 0 : layers_.front().in; }
  int output_dim() const { return layers_.empty() ? 0 : layers_.back().out; }
  const std::vector<AffineLayer>& layers() const { return layers_; }

  std::vector<double> forward(std::span<const double> input) const;

  // Layer activations kept for the backward pass. post[0] is the input,
  // post[l+1] the rectified output of layer l (raw output for the last).
  struct Trace {
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> post;
  };
  std::vector<double> forward_trace(std::span<const double> input, Trace& trace) const;

  struct Gradients {
    std::vector<std::vector<double>> d_weights;
    std::vector<std::vector<double>> d_biases;
  };
  Gradients zero_gradients() const;

  // Accumulates parameter gradients into `grads` and returns the gradient
  // with respect to the input. `d_output` is dL/d(raw last-layer output).
  std::vector<double> backward(const Trace& trace, std::span<const double> d_output,
                               Gradients& grads) const;

  // Flat parameter vector (per layer: weights row-major, then biases) used
  // by the finite-difference harness.
  std::vector<double> flat_params() const;
  void set_flat_params(std::span<const double> params);
  static std::vector<double> flatten_gradients(const Gradients& grads);

  // Binary fixture format: for each layer in order, weights row-major as
  // little-endian float32, then biases. Layer shapes come from `dims`
  // (dims[0] is the input width).
  static Mlp from_file(const std::string& path, const std::vector<int>& dims);
  void save(const std::string& path) const;

  static Mlp zeros(const std::vector<int>& dims);
  static Mlp random(const std::vector<int>& dims, Rng& rng, double scale = 0.5);

 private:
  std::vector<AffineLayer> layers_;
};

}  // namespace panoclust
