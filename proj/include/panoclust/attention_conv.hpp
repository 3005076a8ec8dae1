#pragma once

#include <utility>
#include <vector>

#include "panoclust/mlp.hpp"
#include "panoclust/types.hpp"

namespace panoclust {

enum class KernelShape { kCross, kDiamond, kSquareDense, kSquareDilated };

// Sampling patterns for the spatially adaptive convolution. Offsets are
// (row, col) pairs, deduplicated, sorted row-major; every shape contains
// (0,0). A cross of size K has exactly 2K-1 offsets; the dilated square
// places a 3x3 pattern at spacing floor(K/2).
std::vector<std::pair<int, int>> kernel_offsets(KernelShape shape, int size);

struct KernelSpec {
  KernelShape shape = KernelShape::kCross;
  int size = 3;
  std::vector<std::pair<int, int>> offsets;
};

KernelSpec make_kernel(KernelShape shape, int size);

// Plain dense 2D convolution with zero padding. `kernel` is indexed
// [(kr * K + kc) * n_out + o] * n_in + i with (kr, kc) in [0, K)^2 mapping
// to offsets (kr - K/2, kc - K/2).
FeatureMap conv2d(const FeatureMap& input, const std::vector<double>& kernel, int size,
                  int n_out);

// Attention weights per location: softmax over the offset axis, taken
// independently for each (out, in) channel pair.
struct AttentionTensor {
  int height = 0;
  int width = 0;
  int n_offsets = 0;
  int n_out = 0;
  int n_in = 0;
  std::vector<double> data;

  double at(int row, int col, int offset, int out, int in) const {
    return data[(((static_cast<std::size_t>(row) * width + col) * n_offsets + offset) *
                     n_out + out) * n_in + in];
  }
};

// The MLP consumes the concatenated coordinate differences of the whole
// neighborhood (5 channels per offset; out-of-bounds neighbors contribute
// zeros) and emits one logit per (offset, out, in) triple, offset-major.
AttentionTensor attention_weights(const FeatureMap& coords, const Mlp& mlp,
                                  const KernelSpec& kernel, int n_out, int n_in);

FeatureMap attention_conv(const FeatureMap& input, const FeatureMap& coords,
                          const Mlp& mlp, const KernelSpec& kernel, int n_out);

// Manual backward pass for a scalar loss with upstream gradient
// `d_output` (dL/d x_out). Parameter gradients accumulate into `d_mlp`.
struct AttentionConvGradients {
  Mlp::Gradients d_mlp;
  FeatureMap d_input;
};

AttentionConvGradients attention_conv_backward(const FeatureMap& input,
                                               const FeatureMap& coords, const Mlp& mlp,
                                               const KernelSpec& kernel, int n_out,
                                               const FeatureMap& d_output);

}  // namespace panoclust
