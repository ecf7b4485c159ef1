#include "advprobe/tensor.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "advprobe/rng.hpp"

using namespace advprobe;

TEST(Sign, Elementwise) {
  const Tensor v = Tensor::vec({3.2, -0.1, 0.0});
  const Tensor s = sign(v);
  EXPECT_EQ(s.data, (std::vector<double>{1.0, -1.0, 0.0}));
}

TEST(Sign, ZeroVector) {
  const Tensor z({4});
  EXPECT_EQ(sign(z).data, std::vector<double>(4, 0.0));
}

TEST(Sign, ProductNonNegativeAndIdempotent) {
  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    Tensor v({8});
    for (auto& e : v.data) e = rng.normal();
    const Tensor s = sign(v);
    for (std::size_t i = 0; i < v.size(); ++i)
      EXPECT_GE(s[i] * v[i], 0.0);
    EXPECT_EQ(sign(s).data, s.data);
  }
}

TEST(InfNorm, SmallMatrix) {
  EXPECT_DOUBLE_EQ(inf_norm(Tensor::matrix(2, 2, {1, -2, 3, 4})), 7.0);
}

TEST(InfNorm, Identity) {
  Tensor eye({5, 5});
  for (std::size_t i = 0; i < 5; ++i) eye.at2(i, i) = 1.0;
  EXPECT_DOUBLE_EQ(inf_norm(eye), 1.0);
}

TEST(InfNorm, MatchesRowSumLoop) {
  Rng rng(11);
  Tensor w({5, 5});
  for (auto& e : w.data) e = rng.normal();
  // brute-force oracle: scalar loop over rows
  double expected = 0.0;
  for (std::size_t r = 0; r < 5; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < 5; ++c) s += std::abs(w.data[r * 5 + c]);
    if (s > expected) expected = s;
  }
  EXPECT_DOUBLE_EQ(inf_norm(w), expected);
}

TEST(InfNorm, ScalesAbsolutely) {
  Rng rng(13);
  Tensor w({4, 6});
  for (auto& e : w.data) e = rng.normal();
  Tensor scaled = w;
  for (auto& e : scaled.data) e *= -2.5;
  EXPECT_NEAR(inf_norm(scaled), 2.5 * inf_norm(w), 1e-12);
}

TEST(InfNorm, DegenerateShapes) {
  EXPECT_THROW(inf_norm(Tensor({0, 3})), std::invalid_argument);
  EXPECT_THROW(inf_norm(Tensor::vec({1, 2, 3})), std::invalid_argument);
  try {
    inf_norm(Tensor({0, 0}));
    FAIL() << "expected throw";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("degenerate shape"), std::string::npos);
  }
}

TEST(Softmax, Uniform) {
  const Tensor p = softmax(Tensor::vec({0.0, 0.0}));
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(Softmax, NoOverflow) {
  const Tensor p = softmax(Tensor::vec({1000.0, 0.0}));
  EXPECT_TRUE(std::isfinite(p[0]));
  EXPECT_NEAR(p[0], 1.0, 1e-12);
  EXPECT_NEAR(p[1], 0.0, 1e-12);
}

TEST(Softmax, ShiftInvariantAndNormalized) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor z({6});
    for (auto& e : z.data) e = 5.0 * rng.normal();
    const double shift = 10.0 * rng.normal();
    Tensor shifted = z;
    for (auto& e : shifted.data) e += shift;
    const Tensor a = softmax(z);
    const Tensor b = softmax(shifted);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_GT(a[i], 0.0);
      EXPECT_NEAR(a[i], b[i], 1e-12);
      sum += a[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(LogSumExp, TwoZeros) {
  EXPECT_DOUBLE_EQ(log_sum_exp(Tensor::vec({0.0, 0.0})), std::log(2.0));
}

TEST(LogSumExp, SingleElement) {
  EXPECT_DOUBLE_EQ(log_sum_exp(Tensor::vec({-3.75})), -3.75);
}

TEST(LogSumExp, MatchesDirectSummation) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor z({7});
    for (auto& e : z.data) e = rng.uniform(-20.0, 20.0);
    double direct = 0.0;
    for (double v : z.data) direct += std::exp(v);
    const double got = std::exp(log_sum_exp(z));
    EXPECT_NEAR(got, direct, 1e-10 * direct);
  }
}

TEST(Tensor, ShapeDataMismatch) {
  EXPECT_THROW(Tensor({2, 2}, {1.0, 2.0}), std::invalid_argument);
}

TEST(Tensor, ReshapeKeepsData) {
  Tensor t = Tensor::vec({1, 2, 3, 4, 5, 6});
  Tensor r = reshape(t, {2, 3});
  EXPECT_EQ(r.at2(1, 2), 6.0);
  EXPECT_THROW(reshape(t, {4, 2}), std::invalid_argument);
}
