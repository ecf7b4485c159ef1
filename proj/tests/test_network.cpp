#include "advprobe/network.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include <gtest/gtest.h>

#include "advprobe/arch.hpp"
#include "advprobe/dataset.hpp"
#include "advprobe/model_io.hpp"
#include "advprobe/rng.hpp"
#include "advprobe/train.hpp"
#include "oracles.hpp"

using namespace advprobe;

namespace {

Tensor random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  Tensor w({r, c});
  for (auto& v : w.data) v = rng.normal();
  return w;
}

}  // namespace

TEST(Forward, IdentitySingleLayer) {
  const Network net = single_layer_net(Tensor::matrix(2, 2, {1, 0, 0, 1}));
  const auto r = forward(net, Tensor::vec({1.0, 2.0}));
  EXPECT_EQ(r.logits.data, (std::vector<double>{1.0, 2.0}));
  EXPECT_EQ(r.trace.pre_activations.size(), 1u);
}

TEST(Forward, ReluKillsNegative) {
  const Network net = two_layer_net(Tensor::matrix(2, 2, {1, 0, 0, 1}),
                                    Tensor::matrix(2, 2, {1, 0, 0, 1}));
  const auto r = forward(net, Tensor::vec({-1.0, 2.0}));
  EXPECT_EQ(r.logits.data, (std::vector<double>{0.0, 2.0}));
  EXPECT_EQ(r.trace.pre_activations.size(), 2u);
  EXPECT_EQ(r.trace.pre_activations[0].data, (std::vector<double>{-1.0, 2.0}));
}

TEST(Forward, MatchesNaiveScalarLoops) {
  Rng rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.index(6);
    const std::size_t h1 = 2 + rng.index(6);
    const std::size_t h2 = 2 + rng.index(6);
    const std::size_t k = 2 + rng.index(4);
    std::vector<Tensor> ws = {random_matrix(rng, h1, n),
                              random_matrix(rng, h2, h1),
                              random_matrix(rng, k, h2)};
    std::vector<std::vector<double>> raw;
    std::vector<std::size_t> dims;
    for (const auto& w : ws) {
      raw.push_back(w.data);
      dims.push_back(w.rows());
    }
    Tensor x({n});
    for (auto& v : x.data) v = rng.normal();

    const Network net = mlp_net(std::move(ws));
    const auto got = forward(net, x).logits;
    const auto expected = oracles::naive_mlp_logits(raw, dims, x.data);
    ASSERT_EQ(got.size(), expected.size());
    for (std::size_t i = 0; i < got.size(); ++i)
      EXPECT_NEAR(got[i], expected[i], 1e-12);

    const Tensor p = softmax(got);
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += p[i];
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(Forward, ShapeErrorsNameLayer) {
  Network net = two_layer_net(Tensor::matrix(3, 2, {1, 0, 0, 1, 1, 1}),
                              Tensor::matrix(2, 3, {1, 0, 0, 0, 1, 0}));
  EXPECT_THROW(forward(net, Tensor::vec({1.0, 2.0, 3.0})),
               std::invalid_argument);
  net.layers[2].weights = Tensor::matrix(2, 4, std::vector<double>(8, 1.0));
  try {
    forward(net, Tensor::vec({1.0, 2.0}));
    FAIL() << "expected throw";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("layer 2"), std::string::npos);
  }
}

TEST(Forward, PositivelyHomogeneousWithoutBias) {
  Rng rng(77);
  const Network net = mlp_net({random_matrix(rng, 4, 3),
                               random_matrix(rng, 5, 4),
                               random_matrix(rng, 2, 5)});
  Tensor x({3});
  for (auto& v : x.data) v = rng.normal();
  Tensor x2 = x;
  for (auto& v : x2.data) v *= 3.0;
  const auto a = forward(net, x).trace.pre_activations;
  const auto b = forward(net, x2).trace.pre_activations;
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t l = 0; l < a.size(); ++l)
    for (std::size_t i = 0; i < a[l].size(); ++i)
      EXPECT_NEAR(b[l][i], 3.0 * a[l][i], 1e-12);
}

TEST(Loss, UniformLogits) {
  const Network net = single_layer_net(Tensor::matrix(2, 2, {0, 0, 0, 0}));
  EXPECT_NEAR(loss(net, Tensor::vec({1.0, 5.0}), 0), std::log(2.0), 1e-15);
}

TEST(Loss, SaturatedProbability) {
  const Network net =
      single_layer_net(Tensor::matrix(2, 1, {100.0, -100.0}));
  EXPECT_NEAR(loss(net, Tensor::vec({1.0}), 0), 0.0, 1e-12);
}

TEST(Loss, MatchesNegLogSoftmax) {
  Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t k = 2 + rng.index(8);
    const Network net = single_layer_net(random_matrix(rng, k, 4));
    Tensor x({4});
    for (auto& v : x.data) v = rng.normal();
    const int s = static_cast<int>(rng.index(k));
    const Tensor p = softmax(forward(net, x).logits);
    EXPECT_NEAR(loss(net, x, s), -std::log(p[static_cast<std::size_t>(s)]),
                1e-10);
  }
  EXPECT_THROW(loss(single_layer_net(Tensor::matrix(2, 2, {1, 0, 0, 1})),
                    Tensor::vec({1.0, 2.0}), 2),
               std::invalid_argument);
}

TEST(InputGradient, HandComputedSingleLayer) {
  const Network net = single_layer_net(Tensor::matrix(2, 2, {1, 0, 0, -1}));
  const Tensor g = input_gradient(net, Tensor::vec({0.0, 0.0}), 0);
  EXPECT_NEAR(g[0], -0.5, 1e-15);
  EXPECT_NEAR(g[1], -0.5, 1e-15);
}

TEST(InputGradient, SaturatedIsZero) {
  const Network net =
      single_layer_net(Tensor::matrix(2, 1, {100.0, -100.0}));
  const Tensor g = input_gradient(net, Tensor::vec({1.0}), 0);
  EXPECT_NEAR(g[0], 0.0, 1e-12);
}

TEST(InputGradient, MatchesFiniteDifferences) {
  Rng rng(31);
  int done = 0;
  while (done < 30) {
    const std::size_t depth = 1 + rng.index(3);
    std::vector<Tensor> ws;
    std::size_t in_dim = 2 + rng.index(5);
    std::size_t cur = in_dim;
    for (std::size_t l = 0; l < depth; ++l) {
      const std::size_t out = 2 + rng.index(5);
      ws.push_back(random_matrix(rng, out, cur));
      cur = out;
    }
    const Network net = mlp_net(std::move(ws));
    Tensor x({in_dim});
    for (auto& v : x.data) v = rng.normal();
    const int label = static_cast<int>(rng.index(cur));

    // keep clear of ReLU kinks
    bool ok = true;
    for (const auto& pre : forward(net, x).trace.pre_activations)
      for (std::size_t i = 0; i < pre.size(); ++i)
        if (std::abs(pre[i]) <= 1e-3) ok = false;
    if (!ok) continue;

    const Tensor analytic = input_gradient(net, x, label);
    const Tensor numeric = oracles::fd_input_gradient(net, x, label, 1e-5);
    EXPECT_LE(oracles::max_relative_error(analytic, numeric), 1e-4);
    ++done;
  }
}

TEST(ConvAsMatrix, OneByOneKernelIsScaledIdentity) {
  const double c = 2.75;
  const LayerSpec conv = LayerSpec::conv2d(Tensor({1, 1, 1, 1}, {c}), 1, 0);
  const Tensor m = conv_as_matrix(conv, {1, 3, 3});
  ASSERT_EQ(m.rows(), 9u);
  ASSERT_EQ(m.cols(), 9u);
  for (std::size_t r = 0; r < 9; ++r)
    for (std::size_t col = 0; col < 9; ++col)
      EXPECT_DOUBLE_EQ(m.at2(r, col), r == col ? c : 0.0);
}

TEST(ConvAsMatrix, MatchesDirectConvolution) {
  Rng rng(41);
  Tensor kernel({1, 1, 3, 3});
  for (auto& v : kernel.data) v = rng.normal();
  const LayerSpec conv = LayerSpec::conv2d(kernel, 1, 0);
  const Tensor m = conv_as_matrix(conv, {1, 4, 4});
  for (int trial = 0; trial < 100; ++trial) {
    Tensor x({1, 4, 4});
    for (auto& v : x.data) v = rng.normal();
    Tensor flat = x;
    flat.shape = {16};
    const Tensor via_matrix = matvec(m, flat);
    const auto direct =
        oracles::naive_conv2d(x.data, 1, 4, 4, kernel.data, 1, 3, 3, 1, 0);
    ASSERT_EQ(via_matrix.size(), direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i)
      EXPECT_NEAR(via_matrix[i], direct[i], 1e-12);
  }
}

TEST(ConvAsMatrix, StridePaddingMatchesDirect) {
  Rng rng(43);
  Tensor kernel({3, 2, 3, 3});
  for (auto& v : kernel.data) v = rng.normal();
  const LayerSpec conv = LayerSpec::conv2d(kernel, 2, 1);
  const Tensor m = conv_as_matrix(conv, {2, 5, 5});
  Tensor x({2, 5, 5});
  for (auto& v : x.data) v = rng.normal();
  Tensor flat = x;
  flat.shape = {x.size()};
  const Tensor via_matrix = matvec(m, flat);
  const auto direct =
      oracles::naive_conv2d(x.data, 2, 5, 5, kernel.data, 3, 3, 3, 2, 1);
  ASSERT_EQ(via_matrix.size(), direct.size());
  for (std::size_t i = 0; i < direct.size(); ++i)
    EXPECT_NEAR(via_matrix[i], direct[i], 1e-12);
}

TEST(ConvAsMatrix, ZeroKernelGivesZeroMatrix) {
  const LayerSpec conv = LayerSpec::conv2d(Tensor({1, 1, 2, 2}), 1, 0);
  const Tensor m = conv_as_matrix(conv, {1, 3, 3});
  for (double v : m.data) EXPECT_EQ(v, 0.0);
}

TEST(InputGradient, ConvNetMatchesFiniteDifferences) {
  Rng rng(51);
  const ArchSpec arch = parse_arch("cnn:1x5x5:conv(2,3,1,0)-mlp(3)");
  const Network net = build_network(arch, 99, /*with_bias=*/true);
  for (int trial = 0; trial < 5; ++trial) {
    Tensor x({1, 5, 5});
    for (auto& v : x.data) v = rng.uniform(0.0, 1.0);
    const Tensor analytic = input_gradient(net, x, 1);
    const Tensor numeric = oracles::fd_input_gradient(net, x, 1, 1e-5);
    EXPECT_LE(oracles::max_relative_error(analytic, numeric), 1e-4);
  }
}

TEST(ParamGradients, MatchFiniteDifferences) {
  Rng rng(61);
  const ArchSpec arch = parse_arch("cnn:1x4x4:conv(2,3,1,1)-mlp(4,3)");
  Network net = build_network(arch, 7, /*with_bias=*/true);
  Tensor x({1, 4, 4});
  for (auto& v : x.data) v = rng.uniform(0.0, 1.0);
  const int label = 2;
  const auto grads = param_gradients(net, x, label);
  const double h = 1e-6;
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    if (!net.layers[li].parametric()) continue;
    for (std::size_t j = 0; j < std::min<std::size_t>(6, grads[li].weights.size());
         ++j) {
      const double orig = net.layers[li].weights[j];
      net.layers[li].weights[j] = orig + h;
      const double up = loss(net, x, label);
      net.layers[li].weights[j] = orig - h;
      const double down = loss(net, x, label);
      net.layers[li].weights[j] = orig;
      EXPECT_NEAR(grads[li].weights[j], (up - down) / (2 * h), 1e-5);
    }
    for (std::size_t j = 0; j < grads[li].bias.size(); ++j) {
      const double orig = net.layers[li].bias[j];
      net.layers[li].bias[j] = orig + h;
      const double up = loss(net, x, label);
      net.layers[li].bias[j] = orig - h;
      const double down = loss(net, x, label);
      net.layers[li].bias[j] = orig;
      EXPECT_NEAR(grads[li].bias[j], (up - down) / (2 * h), 1e-5);
    }
  }
}

TEST(Train, SeparableBlobsReachHighAccuracy) {
  const Dataset data = gen_blobs(250, 2, 2, 0.05, 7);
  Network net = build_network(parse_arch("mlp:2-2"), 7);
  TrainConfig cfg;
  cfg.optimizer = SgdConfig{0.5};
  cfg.epochs = 50;
  cfg.batch_size = 32;
  cfg.seed = 7;
  net = train(std::move(net), data, cfg);
  EXPECT_GE(evaluate(net, data).accuracy, 0.99);
}

TEST(Train, ZeroEpochsReturnsInputUnchanged) {
  const Dataset data = gen_blobs(10, 2, 2, 0.05, 3);
  const Network init = build_network(parse_arch("mlp:2-4-2"), 3);
  TrainConfig cfg;
  cfg.epochs = 0;
  const Network out = train(init, data, cfg);
  ASSERT_EQ(out.layers.size(), init.layers.size());
  for (std::size_t i = 0; i < out.layers.size(); ++i)
    EXPECT_EQ(out.layers[i].weights.data, init.layers[i].weights.data);
}

TEST(Train, DeterministicForFixedSeed) {
  const Dataset data = gen_blobs(50, 2, 2, 0.1, 5);
  TrainConfig cfg;
  cfg.optimizer = AdamConfig{};
  cfg.epochs = 5;
  cfg.batch_size = 16;
  cfg.seed = 19;
  const Network a =
      train(build_network(parse_arch("mlp:2-8-2"), 19), data, cfg);
  const Network b =
      train(build_network(parse_arch("mlp:2-8-2"), 19), data, cfg);
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    EXPECT_EQ(a.layers[i].weights.data, b.layers[i].weights.data);
    EXPECT_EQ(a.layers[i].bias.data, b.layers[i].bias.data);
  }
}

TEST(Train, DivergenceIsReported) {
  const Dataset data = gen_blobs(20, 2, 2, 0.1, 5);
  TrainConfig cfg;
  cfg.optimizer = SgdConfig{1e120};
  cfg.epochs = 10;
  cfg.seed = 5;
  try {
    train(build_network(parse_arch("mlp:2-8-8-2"), 5), data, cfg);
    FAIL() << "expected divergence";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("training diverged"),
              std::string::npos);
  }
}

TEST(ModelIo, RoundTripIsExact) {
  const ArchSpec arch = parse_arch("cnn:1x4x4:conv(2,3,1,1)-mlp(5,3)");
  const Network net = build_network(arch, 123, /*with_bias=*/true);
  const auto path = std::filesystem::temp_directory_path() / "advprobe_rt.json";
  save_model(net, path.string());
  const Network loaded = load_model(path.string());
  ASSERT_EQ(loaded.layers.size(), net.layers.size());
  EXPECT_EQ(loaded.input_shape, net.input_shape);
  EXPECT_EQ(loaded.class_count, net.class_count);
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    EXPECT_EQ(loaded.layers[i].kind, net.layers[i].kind);
    EXPECT_EQ(loaded.layers[i].weights.data, net.layers[i].weights.data);
    EXPECT_EQ(loaded.layers[i].bias.data, net.layers[i].bias.data);
  }
  std::filesystem::remove(path);
}

TEST(ModelIo, RejectsMalformedDocuments) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto bad = dir / "advprobe_bad.json";
  {
    std::FILE* f = std::fopen(bad.string().c_str(), "wb");
    ASSERT_NE(f, nullptr);
    std::fputs("{\"input_shape\": [2]", f);
    std::fclose(f);
  }
  EXPECT_THROW(load_model(bad.string()), std::runtime_error);
  EXPECT_THROW(load_model((dir / "advprobe_missing.json").string()),
               std::runtime_error);
  std::filesystem::remove(bad);
}
