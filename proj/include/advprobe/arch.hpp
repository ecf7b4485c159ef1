#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "advprobe/dataset.hpp"
#include "advprobe/network.hpp"
#include "advprobe/rng.hpp"

namespace advprobe {

// Architecture strings:
//   mlp:d0-d1-...-dk                      linear+ReLU between, linear last
//   cnn:CxHxW:conv(oc,k,s,p)-...-mlp(d...)  convs (each + ReLU), then MLP head
struct ConvSpec {
  std::size_t out_channels, kernel, stride, padding;
};

struct MlpArch {
  std::vector<std::size_t> dims;
};

struct CnnArch {
  std::size_t channels, height, width;
  std::vector<ConvSpec> convs;
  std::vector<std::size_t> mlp_dims;
};

using ArchSpec = std::variant<MlpArch, CnnArch>;

namespace detail {

class Cursor {
 public:
  Cursor(const std::string& s, const char* what) : s_(s), what_(what) {}

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument(std::string(what_) + " parse error at position " +
                                std::to_string(pos_) + ": " + msg);
  }

  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }

  bool eat(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }

  bool eat_word(const std::string& w) {
    if (s_.compare(pos_, w.size(), w) != 0) return false;
    pos_ += w.size();
    return true;
  }

  std::size_t integer() {
    if (!std::isdigit(static_cast<unsigned char>(peek())))
      fail("expected integer");
    std::size_t v = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + static_cast<std::size_t>(s_[pos_] - '0');
      ++pos_;
    }
    return v;
  }

  double number() {
    const std::size_t start = pos_;
    while (!done() && (std::isdigit(static_cast<unsigned char>(peek())) ||
                       peek() == '.' || peek() == '-' || peek() == '+' ||
                       peek() == 'e' || peek() == 'E'))
      ++pos_;
    if (pos_ == start) fail("expected number");
    try {
      std::size_t used = 0;
      const double v = std::stod(s_.substr(start, pos_ - start), &used);
      if (used != pos_ - start) fail("malformed number");
      return v;
    } catch (const std::logic_error&) {
      pos_ = start;
      fail("malformed number");
    }
  }

  std::size_t pos() const { return pos_; }

 private:
  const std::string& s_;
  const char* what_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline ArchSpec parse_arch(const std::string& text) {
  detail::Cursor c(text, "arch");
  if (c.eat_word("mlp:")) {
    MlpArch a;
    a.dims.push_back(c.integer());
    while (c.eat('-')) a.dims.push_back(c.integer());
    if (!c.done()) c.fail("trailing characters");
    if (a.dims.size() < 2) c.fail("mlp needs at least input and output dims");
    for (auto d : a.dims)
      if (d == 0) c.fail("zero dimension");
    return a;
  }
  if (c.eat_word("cnn:")) {
    CnnArch a;
    a.channels = c.integer();
    c.expect('x');
    a.height = c.integer();
    c.expect('x');
    a.width = c.integer();
    c.expect(':');
    bool saw_mlp = false;
    while (true) {
      if (c.eat_word("conv(")) {
        if (saw_mlp) c.fail("conv after mlp head");
        ConvSpec cs{};
        cs.out_channels = c.integer();
        c.expect(',');
        cs.kernel = c.integer();
        c.expect(',');
        cs.stride = c.integer();
        c.expect(',');
        cs.padding = c.integer();
        c.expect(')');
        if (cs.out_channels == 0 || cs.kernel == 0 || cs.stride == 0)
          c.fail("conv parameters must be positive (padding may be 0)");
        a.convs.push_back(cs);
      } else if (c.eat_word("mlp(")) {
        saw_mlp = true;
        a.mlp_dims.push_back(c.integer());
        while (c.eat(',')) a.mlp_dims.push_back(c.integer());
        c.expect(')');
      } else {
        c.fail("expected conv(...) or mlp(...)");
      }
      if (!c.eat('-')) break;
    }
    if (!c.done()) c.fail("trailing characters");
    if (!saw_mlp) c.fail("cnn needs an mlp(...) head");
    if (a.convs.empty()) c.fail("cnn needs at least one conv(...)");
    for (auto d : a.mlp_dims)
      if (d == 0) c.fail("zero dimension");
    return a;
  }
  c.fail("expected 'mlp:' or 'cnn:'");
}

// Builds the network with seeded uniform(-a, a) weights, a = sqrt(1/in_dim);
// biases (when enabled) start at zero.
inline Network build_network(const ArchSpec& arch, std::uint64_t seed,
                             bool with_bias = true) {
  Rng rng(seed);
  const auto init = [&rng](Tensor& w, std::size_t in_dim) {
    const double a = std::sqrt(1.0 / static_cast<double>(in_dim));
    for (auto& v : w.data) v = rng.uniform(-a, a);
  };
  Network net;
  if (const auto* mlp = std::get_if<MlpArch>(&arch)) {
    net.input_shape = {mlp->dims.front()};
    net.class_count = mlp->dims.back();
    for (std::size_t i = 1; i < mlp->dims.size(); ++i) {
      if (i > 1) net.layers.push_back(LayerSpec::relu());
      Tensor w({mlp->dims[i], mlp->dims[i - 1]});
      init(w, mlp->dims[i - 1]);
      Tensor b = with_bias ? Tensor({mlp->dims[i]}) : Tensor{};
      net.layers.push_back(LayerSpec::linear(std::move(w), std::move(b)));
    }
  } else {
    const auto& cnn = std::get<CnnArch>(arch);
    net.input_shape = {cnn.channels, cnn.height, cnn.width};
    net.class_count = cnn.mlp_dims.back();
    std::size_t ic = cnn.channels;
    for (const auto& cs : cnn.convs) {
      Tensor w({cs.out_channels, ic, cs.kernel, cs.kernel});
      init(w, ic * cs.kernel * cs.kernel);
      Tensor b = with_bias ? Tensor({cs.out_channels}) : Tensor{};
      net.layers.push_back(
          LayerSpec::conv2d(std::move(w), cs.stride, cs.padding, std::move(b)));
      net.layers.push_back(LayerSpec::relu());
      ic = cs.out_channels;
    }
    const auto shapes = shape_walk(net);
    std::size_t in_dim = Tensor::product(shapes.back());
    for (std::size_t i = 0; i < cnn.mlp_dims.size(); ++i) {
      if (i > 0) net.layers.push_back(LayerSpec::relu());
      Tensor w({cnn.mlp_dims[i], in_dim});
      init(w, in_dim);
      Tensor b = with_bias ? Tensor({cnn.mlp_dims[i]}) : Tensor{};
      net.layers.push_back(LayerSpec::linear(std::move(w), std::move(b)));
      in_dim = cnn.mlp_dims[i];
    }
  }
  validate(net);
  return net;
}

// Data specs:
//   blobs:DIMS:CLASSES:SPREAD:N_PER_CLASS   (seeded by the command seed)
//   idx:IMAGES_PATH:LABELS_PATH
struct BlobsSpec {
  std::size_t dims, classes, n_per_class;
  double spread;
};

struct IdxSpec {
  std::string images, labels;
};

using DataSpec = std::variant<BlobsSpec, IdxSpec>;

inline DataSpec parse_data_spec(const std::string& text) {
  detail::Cursor c(text, "data");
  if (c.eat_word("blobs:")) {
    BlobsSpec b{};
    b.dims = c.integer();
    c.expect(':');
    b.classes = c.integer();
    c.expect(':');
    b.spread = c.number();
    c.expect(':');
    b.n_per_class = c.integer();
    if (!c.done()) c.fail("trailing characters");
    return b;
  }
  if (c.eat_word("idx:")) {
    const std::string rest = text.substr(4);
    const auto sep = rest.find(':');
    if (sep == std::string::npos || sep == 0 || sep + 1 == rest.size())
      c.fail("expected idx:IMAGES_PATH:LABELS_PATH");
    return IdxSpec{rest.substr(0, sep), rest.substr(sep + 1)};
  }
  c.fail("expected 'blobs:' or 'idx:'");
}

inline Dataset realize_data(const DataSpec& spec, std::uint64_t seed) {
  if (const auto* b = std::get_if<BlobsSpec>(&spec))
    return gen_blobs(b->n_per_class, b->dims, b->classes, b->spread, seed);
  const auto& idx = std::get<IdxSpec>(spec);
  return load_idx(idx.images, idx.labels);
}

// Grid spec start:end:step, start < end, step > 0, end inclusive within
// half a step.
inline std::vector<double> parse_grid(const std::string& text) {
  detail::Cursor c(text, "grid");
  const double start = c.number();
  c.expect(':');
  const double end = c.number();
  c.expect(':');
  const double step = c.number();
  if (!c.done()) c.fail("trailing characters");
  if (!(step > 0.0)) c.fail("step must be > 0");
  if (!(start < end)) c.fail("start must be < end");
  std::vector<double> grid;
  for (std::size_t i = 0;; ++i) {
    const double v = start + static_cast<double>(i) * step;
    if (v > end + step * 0.5) break;
    grid.push_back(v);
  }
  if (grid.empty()) throw std::invalid_argument("grid: empty grid");
  return grid;
}

}  // namespace advprobe
