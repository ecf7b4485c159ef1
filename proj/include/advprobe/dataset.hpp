#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "advprobe/rng.hpp"
#include "advprobe/tensor.hpp"

namespace advprobe {

struct Dataset {
  std::vector<Tensor> inputs;
  std::vector<int> labels;
  std::size_t class_count = 0;

  std::size_t size() const { return inputs.size(); }
};

// Gaussian blobs around class centers placed on the simplex vertices
// scaled into [0.2, 0.8]^dims; samples are clamped to [0,1]. Classes are
// interleaved so index-based splits stay balanced.
inline Dataset gen_blobs(std::size_t n_per_class, std::size_t dims,
                         std::size_t class_count, double spread,
                         std::uint64_t seed) {
  if (class_count == 0) throw std::invalid_argument("gen_blobs: no classes");
  if (class_count > dims)
    throw std::invalid_argument(
        "gen_blobs: class_count " + std::to_string(class_count) +
        " exceeds representable centers for dims " + std::to_string(dims));
  if (spread < 0.0) throw std::invalid_argument("gen_blobs: negative spread");
  Rng rng(seed);
  Dataset d;
  d.class_count = class_count;
  d.inputs.reserve(n_per_class * class_count);
  d.labels.reserve(n_per_class * class_count);
  for (std::size_t i = 0; i < n_per_class; ++i) {
    for (std::size_t c = 0; c < class_count; ++c) {
      Tensor x({dims});
      for (std::size_t j = 0; j < dims; ++j) {
        const double center = 0.2 + (j == c ? 0.6 : 0.0);
        x[j] = std::clamp(center + spread * rng.normal(), 0.0, 1.0);
      }
      d.inputs.push_back(std::move(x));
      d.labels.push_back(static_cast<int>(c));
    }
  }
  return d;
}

namespace detail {

inline std::uint32_t read_u32_be(std::ifstream& in, const std::string& path) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error("truncated file: " + path);
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace detail

// IDX image/label pair (big-endian headers, ubyte payload). Pixels are
// normalized to [0,1]; image shape is (1, rows, cols).
inline Dataset load_idx(const std::string& images_path,
                        const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw std::runtime_error("cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw std::runtime_error("cannot open " + labels_path);

  if (detail::read_u32_be(img, images_path) != 0x00000803u)
    throw std::runtime_error("bad magic in " + images_path);
  const std::uint32_t n_images = detail::read_u32_be(img, images_path);
  const std::uint32_t rows = detail::read_u32_be(img, images_path);
  const std::uint32_t cols = detail::read_u32_be(img, images_path);

  if (detail::read_u32_be(lab, labels_path) != 0x00000801u)
    throw std::runtime_error("bad magic in " + labels_path);
  const std::uint32_t n_labels = detail::read_u32_be(lab, labels_path);

  if (n_images != n_labels)
    throw std::runtime_error("count mismatch: " + std::to_string(n_images) +
                             " images vs " + std::to_string(n_labels) +
                             " labels");

  Dataset d;
  std::vector<unsigned char> pixels(static_cast<std::size_t>(rows) * cols);
  int max_label = -1;
  for (std::uint32_t i = 0; i < n_images; ++i) {
    if (!img.read(reinterpret_cast<char*>(pixels.data()),
                  static_cast<std::streamsize>(pixels.size())))
      throw std::runtime_error("truncated file: " + images_path);
    Tensor x({1, rows, cols});
    for (std::size_t j = 0; j < pixels.size(); ++j)
      x[j] = static_cast<double>(pixels[j]) / 255.0;
    d.inputs.push_back(std::move(x));

    char lb;
    if (!lab.read(&lb, 1))
      throw std::runtime_error("truncated file: " + labels_path);
    const int label = static_cast<unsigned char>(lb);
    max_label = std::max(max_label, label);
    d.labels.push_back(label);
  }
  d.class_count = static_cast<std::size_t>(max_label + 1);
  return d;
}

inline Dataset reshape_inputs(Dataset d, std::vector<std::size_t> shape) {
  for (auto& x : d.inputs) x = reshape(std::move(x), shape);
  return d;
}

// Deterministic index-based split: every 5th sample is held out.
inline Dataset split(const Dataset& d, bool test_part) {
  Dataset out;
  out.class_count = d.class_count;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if ((i % 5 == 0) == test_part) {
      out.inputs.push_back(d.inputs[i]);
      out.labels.push_back(d.labels[i]);
    }
  }
  return out;
}

}  // namespace advprobe
