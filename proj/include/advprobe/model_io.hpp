#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "advprobe/network.hpp"

namespace advprobe {

// Model schema:
// {"input_shape": [...], "class_count": k, "layers": [
//    {"kind": "linear", "rows": r, "cols": c,
//     "weights": [row-major], "bias": [...] | null},
//    {"kind": "relu"},
//    {"kind": "conv2d", "out_channels": .., "in_channels": .., "kernel_h": ..,
//     "kernel_w": .., "stride": .., "padding": ..,
//     "weights": [...], "bias": [...] | null}]}
// Weights round-trip exactly: the serializer emits the shortest decimal
// that parses back to the same double.

inline nlohmann::ordered_json to_json(const Network& net) {
  nlohmann::ordered_json j;
  j["input_shape"] = net.input_shape;
  j["class_count"] = net.class_count;
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& layer : net.layers) {
    nlohmann::ordered_json lj;
    switch (layer.kind) {
      case LayerKind::Linear:
        lj["kind"] = "linear";
        lj["rows"] = layer.weights.rows();
        lj["cols"] = layer.weights.cols();
        lj["weights"] = layer.weights.data;
        if (layer.has_bias())
          lj["bias"] = layer.bias.data;
        else
          lj["bias"] = nullptr;
        break;
      case LayerKind::Conv2d:
        lj["kind"] = "conv2d";
        lj["out_channels"] = layer.weights.shape[0];
        lj["in_channels"] = layer.weights.shape[1];
        lj["kernel_h"] = layer.weights.shape[2];
        lj["kernel_w"] = layer.weights.shape[3];
        lj["stride"] = layer.stride;
        lj["padding"] = layer.padding;
        lj["weights"] = layer.weights.data;
        if (layer.has_bias())
          lj["bias"] = layer.bias.data;
        else
          lj["bias"] = nullptr;
        break;
      case LayerKind::Relu:
        lj["kind"] = "relu";
        break;
    }
    j["layers"].push_back(std::move(lj));
  }
  return j;
}

inline Network network_from_json(const nlohmann::ordered_json& j) {
  Network net;
  net.input_shape = j.at("input_shape").get<std::vector<std::size_t>>();
  net.class_count = j.at("class_count").get<std::size_t>();
  for (const auto& lj : j.at("layers")) {
    const std::string kind = lj.at("kind").get<std::string>();
    if (kind == "relu") {
      net.layers.push_back(LayerSpec::relu());
    } else if (kind == "linear") {
      const auto rows = lj.at("rows").get<std::size_t>();
      const auto cols = lj.at("cols").get<std::size_t>();
      Tensor w({rows, cols}, lj.at("weights").get<std::vector<double>>());
      Tensor b;
      if (!lj.at("bias").is_null())
        b = Tensor::vec(lj.at("bias").get<std::vector<double>>());
      net.layers.push_back(LayerSpec::linear(std::move(w), std::move(b)));
    } else if (kind == "conv2d") {
      const auto oc = lj.at("out_channels").get<std::size_t>();
      const auto ic = lj.at("in_channels").get<std::size_t>();
      const auto kh = lj.at("kernel_h").get<std::size_t>();
      const auto kw = lj.at("kernel_w").get<std::size_t>();
      Tensor w({oc, ic, kh, kw}, lj.at("weights").get<std::vector<double>>());
      Tensor b;
      if (!lj.at("bias").is_null())
        b = Tensor::vec(lj.at("bias").get<std::vector<double>>());
      net.layers.push_back(
          LayerSpec::conv2d(std::move(w), lj.at("stride").get<std::size_t>(),
                            lj.at("padding").get<std::size_t>(), std::move(b)));
    } else {
      throw std::runtime_error("model: unknown layer kind '" + kind + "'");
    }
  }
  validate(net);
  return net;
}

inline void save_model(const Network& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << to_json(net).dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline Network load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("model parse error in " + path + ": " + e.what());
  }
  try {
    return network_from_json(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("model schema error in " + path + ": " + e.what());
  }
}

}  // namespace advprobe
