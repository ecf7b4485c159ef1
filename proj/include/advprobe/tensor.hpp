#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace advprobe {

// Dense row-major array of 64-bit floats with shape metadata. Values are
// treated as immutable once built; all operations below are pure.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> s)
      : shape(std::move(s)), data(product(shape), 0.0) {}

  Tensor(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (product(shape) != data.size())
      throw std::invalid_argument("tensor: shape/data size mismatch");
  }

  static std::size_t product(const std::vector<std::size_t>& s) {
    if (s.empty()) return 0;
    std::size_t p = 1;
    for (auto e : s) p *= e;
    return p;
  }

  static Tensor vec(std::vector<double> v) {
    const std::size_t n = v.size();
    return Tensor({n}, std::move(v));
  }

  static Tensor matrix(std::size_t r, std::size_t c, std::vector<double> d) {
    return Tensor({r, c}, std::move(d));
  }

  std::size_t size() const { return data.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t rows() const { return shape.at(0); }
  std::size_t cols() const { return shape.at(1); }

  double operator[](std::size_t i) const { return data[i]; }
  double& operator[](std::size_t i) { return data[i]; }

  double at2(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
  double& at2(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
};

inline std::string shape_string(const std::vector<std::size_t>& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + ")";
}

inline Tensor reshape(Tensor t, std::vector<std::size_t> new_shape) {
  if (Tensor::product(new_shape) != t.size())
    throw std::invalid_argument("reshape: size mismatch " +
                                shape_string(t.shape) + " -> " +
                                shape_string(new_shape));
  t.shape = std::move(new_shape);
  return t;
}

inline double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Elementwise sign with sign(0) = 0.
inline Tensor sign(const Tensor& v) {
  Tensor out(v.shape);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = sgn(v[i]);
  return out;
}

// Infinity norm of a matrix: max over rows of the L1 norm of the row.
inline double inf_norm(const Tensor& w) {
  if (w.rank() != 2 || w.size() == 0)
    throw std::invalid_argument("inf_norm: degenerate shape " +
                                shape_string(w.shape));
  double best = 0.0;
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < w.cols(); ++c) s += std::abs(w.at2(r, c));
    best = std::max(best, s);
  }
  return best;
}

// log(sum_i exp(z_i)), max-subtracted.
inline double log_sum_exp(const Tensor& z) {
  if (z.size() == 0)
    throw std::invalid_argument("log_sum_exp: degenerate shape");
  const double m = *std::max_element(z.data.begin(), z.data.end());
  double s = 0.0;
  for (double v : z.data) s += std::exp(v - m);
  return m + std::log(s);
}

// Stable softmax over a 1-D tensor.
inline Tensor softmax(const Tensor& z) {
  if (z.size() == 0) throw std::invalid_argument("softmax: degenerate shape");
  const double m = *std::max_element(z.data.begin(), z.data.end());
  Tensor out(z.shape);
  double s = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - m);
    s += out[i];
  }
  for (std::size_t i = 0; i < z.size(); ++i) out[i] /= s;
  return out;
}

inline Tensor matvec(const Tensor& w, const Tensor& x) {
  if (w.rank() != 2)
    throw std::invalid_argument("matvec: matrix required, got " +
                                shape_string(w.shape));
  if (w.cols() != x.size())
    throw std::invalid_argument("matvec: size mismatch " +
                                shape_string(w.shape) + " x " +
                                shape_string(x.shape));
  Tensor out({w.rows()});
  for (std::size_t r = 0; r < w.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < w.cols(); ++c) s += w.at2(r, c) * x[c];
    out[r] = s;
  }
  return out;
}

// w^T y without materializing the transpose.
inline Tensor matvec_t(const Tensor& w, const Tensor& y) {
  if (w.rank() != 2 || w.rows() != y.size())
    throw std::invalid_argument("matvec_t: size mismatch");
  Tensor out({w.cols()});
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const double v = y[r];
    if (v == 0.0) continue;
    for (std::size_t c = 0; c < w.cols(); ++c) out[c] += w.at2(r, c) * v;
  }
  return out;
}

inline double dot(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l2_norm_sq(const Tensor& v) { return dot(v, v); }

inline double linf_distance(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("linf_distance: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double l2_distance(const Tensor& a, const Tensor& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("l2_distance: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline std::size_t argmax(const Tensor& v) {
  if (v.size() == 0) throw std::invalid_argument("argmax: degenerate shape");
  std::size_t best = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = i;
  return best;
}

// FNV-1a over raw bytes; used for input digests in reports.
class Fnv1a {
 public:
  void add_bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h_ ^= b[i];
      h_ *= 1099511628211ull;
    }
  }
  void add(double v) { add_bytes(&v, sizeof v); }
  void add(std::uint64_t v) { add_bytes(&v, sizeof v); }
  void add(const Tensor& t) {
    for (auto s : t.shape) add(static_cast<std::uint64_t>(s));
    if (!t.data.empty())
      add_bytes(t.data.data(), t.data.size() * sizeof(double));
  }
  std::uint64_t value() const { return h_; }
  std::string hex() const {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    std::uint64_t v = h_;
    for (int i = 15; i >= 0; --i) {
      out[static_cast<std::size_t>(i)] = digits[v & 0xf];
      v >>= 4;
    }
    return out;
  }

 private:
  std::uint64_t h_ = 1469598103934665603ull;
};

}  // namespace advprobe
