#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <variant>
#include <vector>

#include "advprobe/dataset.hpp"
#include "advprobe/network.hpp"
#include "advprobe/optim.hpp"
#include "advprobe/rng.hpp"

namespace advprobe {

struct SgdConfig {
  double lr = 0.1;
};

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

using OptimizerConfig = std::variant<SgdConfig, AdamConfig>;

struct TrainConfig {
  OptimizerConfig optimizer = SgdConfig{};
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

// Per-layer parameter gradients, aligned with net.layers; ReLU entries
// stay empty.
struct LayerGrads {
  Tensor weights;
  Tensor bias;
};

inline std::vector<LayerGrads> param_gradients(const Network& net,
                                               const Tensor& x, int label,
                                               double* loss_out = nullptr) {
  auto acts = detail::forward_activations(net, x);
  Tensor logits = acts.back();
  logits.shape = {logits.size()};
  if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
    throw std::invalid_argument("label out of range: " + std::to_string(label));
  if (loss_out) *loss_out = loss_from_logits(logits, label);

  Tensor g = softmax(logits);
  g[static_cast<std::size_t>(label)] -= 1.0;

  std::vector<LayerGrads> grads(net.layers.size());
  for (std::size_t i = net.layers.size(); i-- > 0;) {
    const LayerSpec& layer = net.layers[i];
    const Tensor& in = acts[i];
    switch (layer.kind) {
      case LayerKind::Linear: {
        Tensor gw(layer.weights.shape);
        for (std::size_t r = 0; r < layer.weights.rows(); ++r)
          for (std::size_t c = 0; c < layer.weights.cols(); ++c)
            gw.at2(r, c) = g[r] * in[c];
        grads[i].weights = std::move(gw);
        if (layer.has_bias()) {
          Tensor gb = g;
          gb.shape = layer.bias.shape;
          grads[i].bias = std::move(gb);
        }
        Tensor gi = matvec_t(layer.weights, g);
        gi.shape = in.shape;
        g = std::move(gi);
        break;
      }
      case LayerKind::Conv2d: {
        const auto d = detail::conv_dims(layer, in.shape, i);
        const std::size_t s = layer.stride, p = layer.padding;
        Tensor gw(layer.weights.shape);
        Tensor gb = layer.has_bias() ? Tensor(layer.bias.shape) : Tensor{};
        for (std::size_t oc = 0; oc < d.oc; ++oc)
          for (std::size_t oy = 0; oy < d.oh; ++oy)
            for (std::size_t ox = 0; ox < d.ow; ++ox) {
              const double gv = g[(oc * d.oh + oy) * d.ow + ox];
              if (layer.has_bias()) gb[oc] += gv;
              if (gv == 0.0) continue;
              for (std::size_t ic = 0; ic < d.ic; ++ic)
                for (std::size_t ki = 0; ki < d.kh; ++ki)
                  for (std::size_t kj = 0; kj < d.kw; ++kj) {
                    const long iy =
                        static_cast<long>(oy * s + ki) - static_cast<long>(p);
                    const long ix =
                        static_cast<long>(ox * s + kj) - static_cast<long>(p);
                    if (iy < 0 || ix < 0 || iy >= static_cast<long>(d.h) ||
                        ix >= static_cast<long>(d.w))
                      continue;
                    gw[((oc * d.ic + ic) * d.kh + ki) * d.kw + kj] +=
                        gv * in[(ic * d.h + static_cast<std::size_t>(iy)) * d.w +
                                static_cast<std::size_t>(ix)];
                  }
            }
        grads[i].weights = std::move(gw);
        grads[i].bias = std::move(gb);

        const Tensor m = conv_as_matrix(layer, in.shape, i);
        Tensor gflat = g;
        gflat.shape = {g.size()};
        Tensor gi = matvec_t(m, gflat);
        gi.shape = in.shape;
        g = std::move(gi);
        break;
      }
      case LayerKind::Relu: {
        for (std::size_t j = 0; j < g.size(); ++j)
          if (!(in[j] > 0.0)) g[j] = 0.0;
        break;
      }
    }
  }
  return grads;
}

struct EvalStats {
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

inline EvalStats evaluate(const Network& net, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  EvalStats st;
  std::size_t correct = 0;
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto logits = forward(net, data.inputs[i]).logits;
    if (static_cast<int>(argmax(logits)) == data.labels[i]) ++correct;
    total += loss_from_logits(logits, data.labels[i]);
  }
  st.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  st.mean_loss = total / static_cast<double>(data.size());
  return st;
}

// Minibatch training, deterministic for a fixed seed: the shuffle stream
// is the only randomness. Throws "training diverged" on non-finite loss.
inline Network train(Network net, const Dataset& data, const TrainConfig& cfg) {
  if (data.size() == 0) throw std::invalid_argument("train: empty dataset");
  if (cfg.batch_size == 0) throw std::invalid_argument("train: batch_size == 0");

  struct LayerOpt {
    AdamState w, b;
  };
  std::vector<LayerOpt> adam(net.layers.size());
  if (const auto* a = std::get_if<AdamConfig>(&cfg.optimizer)) {
    for (auto& st : adam) {
      st.w.lr = st.b.lr = a->lr;
      st.w.beta1 = st.b.beta1 = a->beta1;
      st.w.beta2 = st.b.beta2 = a->beta2;
      st.w.epsilon = st.b.epsilon = a->epsilon;
    }
  }

  Rng shuffle_rng(cfg.seed);
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double inv = 1.0 / static_cast<double>(stop - start);

      std::vector<LayerGrads> acc(net.layers.size());
      double batch_loss = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        double sample_loss = 0.0;
        auto grads = param_gradients(net, data.inputs[order[k]],
                                     data.labels[order[k]], &sample_loss);
        batch_loss += sample_loss;
        for (std::size_t i = 0; i < grads.size(); ++i) {
          if (grads[i].weights.size() == 0) continue;
          if (acc[i].weights.size() == 0) {
            acc[i] = std::move(grads[i]);
          } else {
            for (std::size_t j = 0; j < acc[i].weights.size(); ++j)
              acc[i].weights[j] += grads[i].weights[j];
            for (std::size_t j = 0; j < acc[i].bias.size(); ++j)
              acc[i].bias[j] += grads[i].bias[j];
          }
        }
      }
      if (!std::isfinite(batch_loss))
        throw std::runtime_error("training diverged");

      for (std::size_t i = 0; i < net.layers.size(); ++i) {
        if (acc[i].weights.size() == 0) continue;
        for (std::size_t j = 0; j < acc[i].weights.size(); ++j)
          acc[i].weights[j] *= inv;
        for (std::size_t j = 0; j < acc[i].bias.size(); ++j)
          acc[i].bias[j] *= inv;

        if (const auto* s = std::get_if<SgdConfig>(&cfg.optimizer)) {
          for (std::size_t j = 0; j < acc[i].weights.size(); ++j)
            net.layers[i].weights[j] -= s->lr * acc[i].weights[j];
          for (std::size_t j = 0; j < acc[i].bias.size(); ++j)
            net.layers[i].bias[j] -= s->lr * acc[i].bias[j];
        } else {
          const Tensor uw = adam_step(adam[i].w, acc[i].weights);
          for (std::size_t j = 0; j < uw.size(); ++j)
            net.layers[i].weights[j] -= uw[j];
          if (acc[i].bias.size() > 0) {
            const Tensor ub = adam_step(adam[i].b, acc[i].bias);
            for (std::size_t j = 0; j < ub.size(); ++j)
              net.layers[i].bias[j] -= ub[j];
          }
        }
      }
    }
  }
  return net;
}

}  // namespace advprobe
