#include "panoclust/attention_conv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "panoclust/errors.hpp"

namespace panoclust {

std::vector<std::pair<int, int>> kernel_offsets(KernelShape shape, int size) {
  if (size < 1 || size % 2 == 0) {
    throw InvalidKernelError("kernel size must be odd and >= 1, got " +
                             std::to_string(size));
  }
  const int radius = size / 2;
  std::set<std::pair<int, int>> offsets;
  switch (shape) {
    case KernelShape::kCross:
      for (int i = -radius; i <= radius; ++i) {
        offsets.insert({i, 0});
        offsets.insert({0, i});
      }
      break;
    case KernelShape::kDiamond:
      for (int di = -radius; di <= radius; ++di) {
        for (int dj = -radius; dj <= radius; ++dj) {
          if (std::abs(di) + std::abs(dj) <= radius) offsets.insert({di, dj});
        }
      }
      break;
    case KernelShape::kSquareDense:
      for (int di = -radius; di <= radius; ++di) {
        for (int dj = -radius; dj <= radius; ++dj) offsets.insert({di, dj});
      }
      break;
    case KernelShape::kSquareDilated:
      for (int di : {-radius, 0, radius}) {
        for (int dj : {-radius, 0, radius}) offsets.insert({di, dj});
      }
      break;
  }
  // std::set of pairs is already row-major ordered.
  return {offsets.begin(), offsets.end()};
}

KernelSpec make_kernel(KernelShape shape, int size) {
  return KernelSpec{shape, size, kernel_offsets(shape, size)};
}

FeatureMap conv2d(const FeatureMap& input, const std::vector<double>& kernel, int size,
                  int n_out) {
  if (size < 1 || size % 2 == 0) {
    throw InvalidKernelError("conv2d kernel size must be odd and >= 1");
  }
  const int n_in = input.channels;
  if (kernel.size() !=
      static_cast<std::size_t>(size) * size * n_out * n_in) {
    throw DimensionError("conv2d kernel does not match KxKxN_outxN_in");
  }
  const int radius = size / 2;
  FeatureMap out(input.height, input.width, n_out);
  for (int row = 0; row < input.height; ++row) {
    for (int col = 0; col < input.width; ++col) {
      for (int kr = 0; kr < size; ++kr) {
        const int nr = row + kr - radius;
        if (nr < 0 || nr >= input.height) continue;
        for (int kc = 0; kc < size; ++kc) {
          const int nc = col + kc - radius;
          if (nc < 0 || nc >= input.width) continue;
          const double* w =
              kernel.data() + (static_cast<std::size_t>(kr) * size + kc) * n_out * n_in;
          for (int o = 0; o < n_out; ++o) {
            double acc = 0.0;
            for (int i = 0; i < n_in; ++i) {
              acc += w[static_cast<std::size_t>(o) * n_in + i] * input.at(nr, nc, i);
            }
            out.at(row, col, o) += acc;
          }
        }
      }
    }
  }
  return out;
}

namespace {

constexpr int kCoordChannels = 5;

// Concatenated coordinate differences for one location; out-of-bounds
// neighbors stay zero.
void gather_coord_diffs(const FeatureMap& coords, const KernelSpec& kernel, int row,
                        int col, std::vector<double>& diff) {
  const int n_offsets = static_cast<int>(kernel.offsets.size());
  diff.assign(static_cast<std::size_t>(n_offsets) * kCoordChannels, 0.0);
  for (int oi = 0; oi < n_offsets; ++oi) {
    const int nr = row + kernel.offsets[oi].first;
    const int nc = col + kernel.offsets[oi].second;
    if (nr < 0 || nr >= coords.height || nc < 0 || nc >= coords.width) continue;
    for (int ch = 0; ch < kCoordChannels; ++ch) {
      diff[static_cast<std::size_t>(oi) * kCoordChannels + ch] =
          coords.at(nr, nc, ch) - coords.at(row, col, ch);
    }
  }
}

void check_shapes(const FeatureMap& coords, const Mlp& mlp, const KernelSpec& kernel,
                  int n_out, int n_in) {
  const int n_offsets = static_cast<int>(kernel.offsets.size());
  if (coords.channels != kCoordChannels) {
    throw DimensionError("coordinate map must have 5 channels");
  }
  if (mlp.input_dim() != n_offsets * kCoordChannels) {
    throw DimensionError("attention mlp input must be offsets*5");
  }
  if (mlp.output_dim() != n_offsets * n_out * n_in) {
    throw DimensionError("attention mlp output must be offsets*n_out*n_in");
  }
}

// Softmax over the offset axis for each (out, in) pair. `logits` is
// offset-major; result written in place.
void softmax_offsets(std::vector<double>& logits, int n_offsets, int pair_count) {
  for (int pair = 0; pair < pair_count; ++pair) {
    double max_logit = -std::numeric_limits<double>::infinity();
    for (int oi = 0; oi < n_offsets; ++oi) {
      max_logit = std::max(max_logit, logits[static_cast<std::size_t>(oi) * pair_count + pair]);
    }
    double denom = 0.0;
    for (int oi = 0; oi < n_offsets; ++oi) {
      double& v = logits[static_cast<std::size_t>(oi) * pair_count + pair];
      v = std::exp(v - max_logit);
      denom += v;
    }
    for (int oi = 0; oi < n_offsets; ++oi) {
      logits[static_cast<std::size_t>(oi) * pair_count + pair] /= denom;
    }
  }
}

}  // namespace

AttentionTensor attention_weights(const FeatureMap& coords, const Mlp& mlp,
                                  const KernelSpec& kernel, int n_out, int n_in) {
  check_shapes(coords, mlp, kernel, n_out, n_in);
  const int n_offsets = static_cast<int>(kernel.offsets.size());
  const int pair_count = n_out * n_in;

  AttentionTensor attn;
  attn.height = coords.height;
  attn.width = coords.width;
  attn.n_offsets = n_offsets;
  attn.n_out = n_out;
  attn.n_in = n_in;
  attn.data.resize(static_cast<std::size_t>(coords.height) * coords.width * n_offsets *
                   pair_count);

  std::vector<double> diff;
  for (int row = 0; row < coords.height; ++row) {
    for (int col = 0; col < coords.width; ++col) {
      gather_coord_diffs(coords, kernel, row, col, diff);
      std::vector<double> logits = mlp.forward(diff);
      for (double v : logits) {
        if (!std::isfinite(v)) {
          throw NumericError("non-finite attention logit");
        }
      }
      softmax_offsets(logits, n_offsets, pair_count);
      std::copy(logits.begin(), logits.end(),
                attn.data.begin() + (static_cast<std::size_t>(row) * coords.width + col) *
                                        n_offsets * pair_count);
    }
  }
  return attn;
}

FeatureMap attention_conv(const FeatureMap& input, const FeatureMap& coords,
                          const Mlp& mlp, const KernelSpec& kernel, int n_out) {
  if (input.height != coords.height || input.width != coords.width) {
    throw DimensionError("feature and coordinate maps differ in shape");
  }
  const int n_in = input.channels;
  const AttentionTensor attn = attention_weights(coords, mlp, kernel, n_out, n_in);
  const int n_offsets = attn.n_offsets;

  FeatureMap out(input.height, input.width, n_out);
  for (int row = 0; row < input.height; ++row) {
    for (int col = 0; col < input.width; ++col) {
      for (int oi = 0; oi < n_offsets; ++oi) {
        const int nr = row + kernel.offsets[oi].first;
        const int nc = col + kernel.offsets[oi].second;
        if (nr < 0 || nr >= input.height || nc < 0 || nc >= input.width) continue;
        for (int o = 0; o < n_out; ++o) {
          double acc = 0.0;
          for (int i = 0; i < n_in; ++i) {
            acc += attn.at(row, col, oi, o, i) * input.at(nr, nc, i);
          }
          out.at(row, col, o) += acc;
        }
      }
    }
  }
  return out;
}

AttentionConvGradients attention_conv_backward(const FeatureMap& input,
                                               const FeatureMap& coords, const Mlp& mlp,
                                               const KernelSpec& kernel, int n_out,
                                               const FeatureMap& d_output) {
  if (input.height != coords.height || input.width != coords.width) {
    throw DimensionError("feature and coordinate maps differ in shape");
  }
  if (d_output.height != input.height || d_output.width != input.width ||
      d_output.channels != n_out) {
    throw DimensionError("upstream gradient does not match output shape");
  }
  const int n_in = input.channels;
  check_shapes(coords, mlp, kernel, n_out, n_in);
  const int n_offsets = static_cast<int>(kernel.offsets.size());
  const int pair_count = n_out * n_in;

  AttentionConvGradients grads;
  grads.d_mlp = mlp.zero_gradients();
  grads.d_input = FeatureMap(input.height, input.width, n_in);

  std::vector<double> diff;
  std::vector<double> d_attn(static_cast<std::size_t>(n_offsets) * pair_count);
  std::vector<double> d_logits(d_attn.size());
  Mlp::Trace trace;

  for (int row = 0; row < input.height; ++row) {
    for (int col = 0; col < input.width; ++col) {
      gather_coord_diffs(coords, kernel, row, col, diff);
      std::vector<double> attn = mlp.forward_trace(diff, trace);
      softmax_offsets(attn, n_offsets, pair_count);

      std::fill(d_attn.begin(), d_attn.end(), 0.0);
      for (int oi = 0; oi < n_offsets; ++oi) {
        const int nr = row + kernel.offsets[oi].first;
        const int nc = col + kernel.offsets[oi].second;
        if (nr < 0 || nr >= input.height || nc < 0 || nc >= input.width) continue;
        for (int o = 0; o < n_out; ++o) {
          const double g = d_output.at(row, col, o);
          if (g == 0.0) continue;
          for (int i = 0; i < n_in; ++i) {
            const std::size_t idx =
                (static_cast<std::size_t>(oi) * n_out + o) * n_in + i;
            d_attn[idx] += g * input.at(nr, nc, i);
            grads.d_input.at(nr, nc, i) += g * attn[idx];
          }
        }
      }

      // Softmax backward per (out, in) slice.
      for (int pair = 0; pair < pair_count; ++pair) {
        double dot = 0.0;
        for (int oi = 0; oi < n_offsets; ++oi) {
          const std::size_t idx = static_cast<std::size_t>(oi) * pair_count + pair;
          dot += attn[idx] * d_attn[idx];
        }
        for (int oi = 0; oi < n_offsets; ++oi) {
          const std::size_t idx = static_cast<std::size_t>(oi) * pair_count + pair;
          d_logits[idx] = attn[idx] * (d_attn[idx] - dot);
        }
      }
      mlp.backward(trace, d_logits, grads.d_mlp);
    }
  }
  return grads;
}

}  // namespace panoclust
