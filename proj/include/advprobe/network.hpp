#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "advprobe/tensor.hpp"

namespace advprobe {

enum class LayerKind { Linear, Conv2d, Relu };

// One layer of a feed-forward stack. Linear weights are (out, in); conv
// weights are (out_channels, in_channels, kh, kw). ReLU layers carry no
// parameters. Softmax is never a layer: it is the fixed output convention
// of Network, so logits stay accessible to the attacks that need them.
struct LayerSpec {
  LayerKind kind = LayerKind::Relu;
  Tensor weights;
  Tensor bias;  // empty when absent
  std::size_t stride = 1;
  std::size_t padding = 0;

  bool parametric() const { return kind != LayerKind::Relu; }
  bool has_bias() const { return bias.size() > 0; }

  static LayerSpec linear(Tensor w, Tensor b = {}) {
    if (w.rank() != 2)
      throw std::invalid_argument("linear layer: weights must be 2-D");
    if (b.size() > 0 && b.size() != w.rows())
      throw std::invalid_argument("linear layer: bias size mismatch");
    LayerSpec l;
    l.kind = LayerKind::Linear;
    l.weights = std::move(w);
    l.bias = std::move(b);
    return l;
  }

  static LayerSpec conv2d(Tensor w, std::size_t stride, std::size_t padding,
                          Tensor b = {}) {
    if (w.rank() != 4)
      throw std::invalid_argument("conv2d layer: weights must be 4-D");
    if (stride == 0) throw std::invalid_argument("conv2d layer: stride == 0");
    if (b.size() > 0 && b.size() != w.shape[0])
      throw std::invalid_argument("conv2d layer: bias size mismatch");
    LayerSpec l;
    l.kind = LayerKind::Conv2d;
    l.weights = std::move(w);
    l.bias = std::move(b);
    l.stride = stride;
    l.padding = padding;
    return l;
  }

  static LayerSpec relu() { return LayerSpec{}; }
};

struct Network {
  std::vector<LayerSpec> layers;
  std::vector<std::size_t> input_shape;
  std::size_t class_count = 0;
};

// Pre-activations: one tensor per linear/conv layer, taken before ReLU.
struct IntermediateTrace {
  std::vector<Tensor> pre_activations;
};

struct ForwardResult {
  Tensor logits;
  IntermediateTrace trace;
};

namespace detail {

inline std::runtime_error layer_error(std::size_t index, const std::string& msg) {
  return std::runtime_error("layer " + std::to_string(index) + ": " + msg);
}

struct ConvDims {
  std::size_t oc, ic, kh, kw, h, w, oh, ow;
};

inline ConvDims conv_dims(const LayerSpec& layer,
                          const std::vector<std::size_t>& in_shape,
                          std::size_t layer_index) {
  if (in_shape.size() != 3)
    throw layer_error(layer_index, "conv2d input shape mismatch, expected "
                                   "(channels,height,width), got " +
                                       shape_string(in_shape));
  ConvDims d{};
  d.oc = layer.weights.shape[0];
  d.ic = layer.weights.shape[1];
  d.kh = layer.weights.shape[2];
  d.kw = layer.weights.shape[3];
  if (in_shape[0] != d.ic)
    throw layer_error(layer_index, "conv2d channel mismatch");
  d.h = in_shape[1];
  d.w = in_shape[2];
  const std::size_t p = layer.padding, s = layer.stride;
  if (d.h + 2 * p < d.kh || d.w + 2 * p < d.kw)
    throw layer_error(layer_index, "conv2d kernel exceeds padded input");
  d.oh = (d.h + 2 * p - d.kh) / s + 1;
  d.ow = (d.w + 2 * p - d.kw) / s + 1;
  return d;
}

}  // namespace detail

// Explicit matrix M with flatten(conv(X)) == M * flatten(X). Convolution is
// applied through this matrix, which also lets the linear-layer bounds apply
// to conv layers directly.
inline Tensor conv_as_matrix(const LayerSpec& layer,
                             const std::vector<std::size_t>& in_shape,
                             std::size_t layer_index = 0) {
  if (layer.kind != LayerKind::Conv2d)
    throw std::invalid_argument("conv_as_matrix: not a conv2d layer");
  const auto d = detail::conv_dims(layer, in_shape, layer_index);
  const std::size_t s = layer.stride, p = layer.padding;
  Tensor m({d.oc * d.oh * d.ow, d.ic * d.h * d.w});
  for (std::size_t oc = 0; oc < d.oc; ++oc)
    for (std::size_t oy = 0; oy < d.oh; ++oy)
      for (std::size_t ox = 0; ox < d.ow; ++ox) {
        const std::size_t row = (oc * d.oh + oy) * d.ow + ox;
        for (std::size_t ic = 0; ic < d.ic; ++ic)
          for (std::size_t ki = 0; ki < d.kh; ++ki)
            for (std::size_t kj = 0; kj < d.kw; ++kj) {
              const long iy = static_cast<long>(oy * s + ki) - static_cast<long>(p);
              const long ix = static_cast<long>(ox * s + kj) - static_cast<long>(p);
              if (iy < 0 || ix < 0 || iy >= static_cast<long>(d.h) ||
                  ix >= static_cast<long>(d.w))
                continue;
              const std::size_t col =
                  (ic * d.h + static_cast<std::size_t>(iy)) * d.w +
                  static_cast<std::size_t>(ix);
              m.at2(row, col) =
                  layer.weights[((oc * d.ic + ic) * d.kh + ki) * d.kw + kj];
            }
      }
  return m;
}

namespace detail {

// Runs every layer, keeping each activation: acts[0] = x, acts[i] = output
// of layer i-1. Conv layers go through their materialized matrix.
inline std::vector<Tensor> forward_activations(const Network& net,
                                               const Tensor& x) {
  if (x.shape != net.input_shape)
    throw std::invalid_argument("input shape mismatch: expected " +
                                shape_string(net.input_shape) + ", got " +
                                shape_string(x.shape));
  std::vector<Tensor> acts;
  acts.reserve(net.layers.size() + 1);
  acts.push_back(x);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& layer = net.layers[i];
    const Tensor& in = acts.back();
    switch (layer.kind) {
      case LayerKind::Linear: {
        if (layer.weights.cols() != in.size())
          throw layer_error(i, "linear expects input size " +
                                   std::to_string(layer.weights.cols()) +
                                   ", got " + std::to_string(in.size()));
        Tensor flat = in;
        flat.shape = {in.size()};
        Tensor out = matvec(layer.weights, flat);
        if (layer.has_bias())
          for (std::size_t j = 0; j < out.size(); ++j) out[j] += layer.bias[j];
        acts.push_back(std::move(out));
        break;
      }
      case LayerKind::Conv2d: {
        const auto d = conv_dims(layer, in.shape, i);
        const Tensor m = conv_as_matrix(layer, in.shape, i);
        Tensor flat = in;
        flat.shape = {in.size()};
        Tensor out = matvec(m, flat);
        out.shape = {d.oc, d.oh, d.ow};
        if (layer.has_bias())
          for (std::size_t oc = 0; oc < d.oc; ++oc)
            for (std::size_t j = 0; j < d.oh * d.ow; ++j)
              out[oc * d.oh * d.ow + j] += layer.bias[oc];
        acts.push_back(std::move(out));
        break;
      }
      case LayerKind::Relu: {
        Tensor out = in;
        for (auto& v : out.data) v = v > 0.0 ? v : 0.0;
        acts.push_back(std::move(out));
        break;
      }
    }
  }
  return acts;
}

}  // namespace detail

inline ForwardResult forward(const Network& net, const Tensor& x) {
  auto acts = detail::forward_activations(net, x);
  ForwardResult r;
  for (std::size_t i = 0; i < net.layers.size(); ++i)
    if (net.layers[i].parametric())
      r.trace.pre_activations.push_back(acts[i + 1]);
  r.logits = std::move(acts.back());
  r.logits.shape = {r.logits.size()};
  if (net.class_count != 0 && r.logits.size() != net.class_count)
    throw std::runtime_error("network output size " +
                             std::to_string(r.logits.size()) +
                             " != class_count " +
                             std::to_string(net.class_count));
  return r;
}

inline int predict(const Network& net, const Tensor& x) {
  return static_cast<int>(argmax(forward(net, x).logits));
}

// Cross-entropy against a one-hot label, in the stable
// log_sum_exp(z) - z[s] form.
inline double loss_from_logits(const Tensor& logits, int label) {
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
    throw std::invalid_argument("label out of range: " + std::to_string(label));
  return log_sum_exp(logits) - logits[static_cast<std::size_t>(label)];
}

inline double loss(const Network& net, const Tensor& x, int label) {
  return loss_from_logits(forward(net, x).logits, label);
}

namespace detail {

// Pushes a gradient at the logits back to the input. ReLU backward uses
// subgradient 0 at exactly 0.
inline Tensor backpropagate_to_input(const Network& net,
                                     const std::vector<Tensor>& acts,
                                     Tensor g) {
  for (std::size_t i = net.layers.size(); i-- > 0;) {
    const LayerSpec& layer = net.layers[i];
    const Tensor& in = acts[i];
    switch (layer.kind) {
      case LayerKind::Linear: {
        Tensor gi = matvec_t(layer.weights, g);
        gi.shape = in.shape;
        g = std::move(gi);
        break;
      }
      case LayerKind::Conv2d: {
        const Tensor m = conv_as_matrix(layer, in.shape, i);
        Tensor gflat = g;
        gflat.shape = {g.size()};
        Tensor gi = matvec_t(m, gflat);
        gi.shape = in.shape;
        g = std::move(gi);
        break;
      }
      case LayerKind::Relu: {
        Tensor gi = std::move(g);
        for (std::size_t j = 0; j < gi.size(); ++j)
          if (!(in[j] > 0.0)) gi[j] = 0.0;
        g = std::move(gi);
        break;
      }
    }
  }
  return g;
}

}  // namespace detail

// Gradient of the cross-entropy loss with respect to the input.
inline Tensor input_gradient(const Network& net, const Tensor& x, int label) {
  auto acts = detail::forward_activations(net, x);
  Tensor logits = acts.back();
  logits.shape = {logits.size()};
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
    throw std::invalid_argument("label out of range: " + std::to_string(label));
  Tensor g = softmax(logits);
  g[static_cast<std::size_t>(label)] -= 1.0;
  return detail::backpropagate_to_input(net, acts, std::move(g));
}

// Gradient of dot(seed, logits) with respect to the input; the CW margin
// term backpropagates through this with seed = e_i - e_t.
inline Tensor input_gradient_of_logits(const Network& net, const Tensor& x,
                                       const Tensor& logit_seed) {
  auto acts = detail::forward_activations(net, x);
  if (logit_seed.size() != acts.back().size())
    throw std::invalid_argument("logit seed size mismatch");
  Tensor g = logit_seed;
  g.shape = {g.size()};
  return detail::backpropagate_to_input(net, acts, std::move(g));
}

// Output shape of every layer for a given input shape; throws the same
// shape errors as forward without touching data.
inline std::vector<std::vector<std::size_t>> shape_walk(const Network& net) {
  std::vector<std::vector<std::size_t>> shapes;
  std::vector<std::size_t> cur = net.input_shape;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& layer = net.layers[i];
    switch (layer.kind) {
      case LayerKind::Linear:
        if (layer.weights.cols() != Tensor::product(cur))
          throw detail::layer_error(
              i, "linear expects input size " +
                     std::to_string(layer.weights.cols()) + ", got " +
                     std::to_string(Tensor::product(cur)));
        cur = {layer.weights.rows()};
        break;
      case LayerKind::Conv2d: {
        const auto d = detail::conv_dims(layer, cur, i);
        cur = {d.oc, d.oh, d.ow};
        break;
      }
      case LayerKind::Relu:
        break;
    }
    shapes.push_back(cur);
  }
  return shapes;
}

inline void validate(const Network& net) {
  if (Tensor::product(net.input_shape) == 0)
    throw std::runtime_error("network: degenerate input shape");
  const auto shapes = shape_walk(net);
  const std::size_t out =
      shapes.empty() ? Tensor::product(net.input_shape)
                     : Tensor::product(shapes.back());
  if (net.class_count == 0 || out != net.class_count)
    throw std::runtime_error("network output size " + std::to_string(out) +
                             " != class_count " +
                             std::to_string(net.class_count));
}

// The explicit matrix of every parametric layer, conv layers included.
inline std::vector<Tensor> layer_matrices(const Network& net) {
  std::vector<Tensor> mats;
  std::vector<std::size_t> cur = net.input_shape;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const LayerSpec& layer = net.layers[i];
    switch (layer.kind) {
      case LayerKind::Linear:
        mats.push_back(layer.weights);
        cur = {layer.weights.rows()};
        break;
      case LayerKind::Conv2d: {
        const auto d = detail::conv_dims(layer, cur, i);
        mats.push_back(conv_as_matrix(layer, cur, i));
        cur = {d.oc, d.oh, d.ow};
        break;
      }
      case LayerKind::Relu:
        break;
    }
  }
  return mats;
}

inline Network single_layer_net(Tensor w) {
  Network net;
  net.input_shape = {w.cols()};
  net.class_count = w.rows();
  net.layers.push_back(LayerSpec::linear(std::move(w)));
  return net;
}

inline Network two_layer_net(Tensor w, Tensor v) {
  Network net;
  net.input_shape = {w.cols()};
  net.class_count = v.rows();
  net.layers.push_back(LayerSpec::linear(std::move(w)));
  net.layers.push_back(LayerSpec::relu());
  net.layers.push_back(LayerSpec::linear(std::move(v)));
  return net;
}

// Bias-free MLP from a weight chain, ReLU between consecutive layers.
inline Network mlp_net(std::vector<Tensor> ws) {
  if (ws.empty()) throw std::invalid_argument("mlp_net: no layers");
  Network net;
  net.input_shape = {ws.front().cols()};
  net.class_count = ws.back().rows();
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (i) net.layers.push_back(LayerSpec::relu());
    net.layers.push_back(LayerSpec::linear(std::move(ws[i])));
  }
  return net;
}

inline std::string digest(const Network& net) {
  Fnv1a h;
  for (auto s : net.input_shape) h.add(static_cast<std::uint64_t>(s));
  h.add(static_cast<std::uint64_t>(net.class_count));
  for (const auto& layer : net.layers) {
    h.add(static_cast<std::uint64_t>(layer.kind));
    h.add(static_cast<std::uint64_t>(layer.stride));
    h.add(static_cast<std::uint64_t>(layer.padding));
    h.add(layer.weights);
    h.add(layer.bias);
  }
  return h.hex();
}

}  // namespace advprobe
