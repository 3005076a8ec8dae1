#include "panoclust/mlp.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "panoclust/errors.hpp"
#include "panoclust/scan_io.hpp"

namespace panoclust {

Mlp::Mlp(std::vector<AffineLayer> layers) : layers_(std::move(layers)) {
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const AffineLayer& layer = layers_[l];
    if (layer.weights.size() != static_cast<std::size_t>(layer.in) * layer.out ||
        layer.biases.size() != static_cast<std::size_t>(layer.out)) {
      throw DimensionError("mlp layer " + std::to_string(l) + " has inconsistent shapes");
    }
    if (l > 0 && layers_[l - 1].out != layer.in) {
      throw DimensionError("mlp layer " + std::to_string(l) +
                           " input does not chain with previous output");
    }
  }
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  Trace trace;
  return forward_trace(input, trace);
}

std::vector<double> Mlp::forward_trace(std::span<const double> input, Trace& trace) const {
  if (input.size() != static_cast<std::size_t>(input_dim())) {
    throw DimensionError("mlp input size mismatch");
  }
  trace.pre.assign(layers_.size(), {});
  trace.post.assign(layers_.size() + 1, {});
  trace.post[0].assign(input.begin(), input.end());

  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const AffineLayer& layer = layers_[l];
    const std::vector<double>& a = trace.post[l];
    std::vector<double> z(layer.out);
    for (int o = 0; o < layer.out; ++o) {
      double acc = layer.biases[o];
      const double* wrow = layer.weights.data() + static_cast<std::size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) acc += wrow[i] * a[i];
      z[o] = acc;
    }
    trace.pre[l] = z;
    if (l + 1 < layers_.size()) {
      for (double& v : z) v = v > 0.0 ? v : 0.0;
    }
    trace.post[l + 1] = std::move(z);
  }
  return trace.post.back();
}

Mlp::Gradients Mlp::zero_gradients() const {
  Gradients grads;
  grads.d_weights.reserve(layers_.size());
  grads.d_biases.reserve(layers_.size());
  for (const AffineLayer& layer : layers_) {
    grads.d_weights.emplace_back(layer.weights.size(), 0.0);
    grads.d_biases.emplace_back(layer.biases.size(), 0.0);
  }
  return grads;
}

std::vector<double> Mlp::backward(const Trace& trace, std::span<const double> d_output,
                                  Gradients& grads) const {
  if (d_output.size() != static_cast<std::size_t>(output_dim())) {
    throw DimensionError("mlp gradient size mismatch");
  }
  std::vector<double> d(d_output.begin(), d_output.end());
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const AffineLayer& layer = layers_[li];
    const std::vector<double>& a = trace.post[li];
    for (int o = 0; o < layer.out; ++o) {
      const double g = d[o];
      grads.d_biases[li][o] += g;
      double* wgrad = grads.d_weights[li].data() + static_cast<std::size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) wgrad[i] += g * a[i];
    }
    std::vector<double> d_prev(layer.in, 0.0);
    for (int o = 0; o < layer.out; ++o) {
      const double g = d[o];
      const double* wrow = layer.weights.data() + static_cast<std::size_t>(o) * layer.in;
      for (int i = 0; i < layer.in; ++i) d_prev[i] += g * wrow[i];
    }
    if (li > 0) {
      // Rectifier between layers: gate by the previous pre-activation sign.
      const std::vector<double>& z_prev = trace.pre[li - 1];
      for (int i = 0; i < layer.in; ++i) {
        if (z_prev[i] <= 0.0) d_prev[i] = 0.0;
      }
    }
    d = std::move(d_prev);
  }
  return d;
}

std::vector<double> Mlp::flat_params() const {
  std::vector<double> flat;
  for (const AffineLayer& layer : layers_) {
    flat.insert(flat.end(), layer.weights.begin(), layer.weights.end());
    flat.insert(flat.end(), layer.biases.begin(), layer.biases.end());
  }
  return flat;
}

void Mlp::set_flat_params(std::span<const double> params) {
  std::size_t pos = 0;
  for (AffineLayer& layer : layers_) {
    if (pos + layer.weights.size() + layer.biases.size() > params.size()) {
      throw DimensionError("flat parameter vector too short");
    }
    std::copy_n(params.begin() + pos, layer.weights.size(), layer.weights.begin());
    pos += layer.weights.size();
    std::copy_n(params.begin() + pos, layer.biases.size(), layer.biases.begin());
    pos += layer.biases.size();
  }
  if (pos != params.size()) {
    throw DimensionError("flat parameter vector too long");
  }
}

std::vector<double> Mlp::flatten_gradients(const Gradients& grads) {
  std::vector<double> flat;
  for (std::size_t l = 0; l < grads.d_weights.size(); ++l) {
    flat.insert(flat.end(), grads.d_weights[l].begin(), grads.d_weights[l].end());
    flat.insert(flat.end(), grads.d_biases[l].begin(), grads.d_biases[l].end());
  }
  return flat;
}

namespace {

std::vector<AffineLayer> shape_layers(const std::vector<int>& dims) {
  if (dims.size() < 2) {
    throw DimensionError("mlp needs at least one layer (two dims)");
  }
  std::vector<AffineLayer> layers;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    AffineLayer layer;
    layer.in = dims[l];
    layer.out = dims[l + 1];
    layer.weights.assign(static_cast<std::size_t>(layer.in) * layer.out, 0.0);
    layer.biases.assign(layer.out, 0.0);
    layers.push_back(std::move(layer));
  }
  return layers;
}

}  // namespace

Mlp Mlp::zeros(const std::vector<int>& dims) { return Mlp(shape_layers(dims)); }

Mlp Mlp::random(const std::vector<int>& dims, Rng& rng, double scale) {
  auto layers = shape_layers(dims);
  for (AffineLayer& layer : layers) {
    for (double& w : layer.weights) w = rng.uniform(-scale, scale);
    for (double& b : layer.biases) b = rng.uniform(-scale, scale);
  }
  return Mlp(std::move(layers));
}

Mlp Mlp::from_file(const std::string& path, const std::vector<int>& dims) {
  auto layers = shape_layers(dims);
  std::size_t expected = 0;
  for (const AffineLayer& layer : layers) {
    expected += layer.weights.size() + layer.biases.size();
  }
  const auto bytes = read_file(path);
  if (bytes.size() != expected * 4) {
    throw DimensionError("mlp fixture " + path + " has " + std::to_string(bytes.size()) +
                         " bytes, expected " + std::to_string(expected * 4));
  }
  std::size_t pos = 0;
  auto take = [&bytes, &pos]() {
    uint32_t word = static_cast<uint32_t>(bytes[pos]) |
                    (static_cast<uint32_t>(bytes[pos + 1]) << 8) |
                    (static_cast<uint32_t>(bytes[pos + 2]) << 16) |
                    (static_cast<uint32_t>(bytes[pos + 3]) << 24);
    pos += 4;
    return static_cast<double>(std::bit_cast<float>(word));
  };
  for (AffineLayer& layer : layers) {
    for (double& w : layer.weights) w = take();
    for (double& b : layer.biases) b = take();
  }
  return Mlp(std::move(layers));
}

void Mlp::save(const std::string& path) const {
  std::vector<uint8_t> bytes;
  auto put = [&bytes](double v) {
    const uint32_t word = std::bit_cast<uint32_t>(static_cast<float>(v));
    bytes.push_back(static_cast<uint8_t>(word & 0xff));
    bytes.push_back(static_cast<uint8_t>((word >> 8) & 0xff));
    bytes.push_back(static_cast<uint8_t>((word >> 16) & 0xff));
    bytes.push_back(static_cast<uint8_t>((word >> 24) & 0xff));
  };
  for (const AffineLayer& layer : layers_) {
    for (double w : layer.weights) put(w);
    for (double b : layer.biases) put(b);
  }
  write_file(path, bytes);
}

}  // namespace panoclust
