#include "advprobe/theory.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "advprobe/attacks.hpp"
#include "advprobe/network.hpp"
#include "advprobe/rng.hpp"
#include "advprobe/suites.hpp"
#include "oracles.hpp"

using namespace advprobe;
using theory::Direction;
using theory::RatioVerdict;
using theory::Verdict;

namespace {

Tensor random_matrix(Rng& rng, std::size_t r, std::size_t c) {
  Tensor w({r, c});
  for (auto& v : w.data) v = rng.normal();
  return w;
}

Tensor random_vector(Rng& rng, std::size_t n) {
  Tensor x({n});
  for (auto& v : x.data) v = rng.normal();
  return x;
}

}  // namespace

TEST(EpsilonBoundTwoLayer, IdentityCases) {
  const Tensor eye = Tensor::matrix(2, 2, {1, 0, 0, 1});
  EXPECT_DOUBLE_EQ(theory::epsilon_bound_two_layer(eye, Tensor::vec({1, 2})),
                   1.0);
  const Tensor twice = Tensor::matrix(2, 2, {2, 0, 0, 2});
  EXPECT_DOUBLE_EQ(theory::epsilon_bound_two_layer(twice, Tensor::vec({1, 2})),
                   1.0);
}

TEST(EpsilonBoundTwoLayer, ZeroPreActivationIsHypothesisViolation) {
  const Tensor w = Tensor::matrix(2, 2, {1, -1, 0, 1});
  try {
    theory::epsilon_bound_two_layer(w, Tensor::vec({1.0, 1.0}));
    FAIL() << "expected throw";
  } catch (const std::domain_error& e) {
    EXPECT_NE(std::string(e.what()).find("hypothesis violated"),
              std::string::npos);
  }
}

TEST(EpsilonBoundTwoLayer, BelowBoundPreservesLayerOneSigns) {
  Rng rng(42);
  int done = 0;
  while (done < 1000) {
    const std::size_t n = 2 + rng.index(10);
    const std::size_t l = 2 + rng.index(10);
    const std::size_t k = 2 + rng.index(6);
    const Tensor w = random_matrix(rng, l, n);
    const Tensor v = random_matrix(rng, k, l);
    const Tensor x = random_vector(rng, n);
    double bound = 0.0;
    try {
      bound = theory::epsilon_bound_two_layer(w, x);
    } catch (const std::domain_error&) {
      continue;
    }
    const Network net = two_layer_net(w, v);
    AttackConfig cfg;
    cfg.epsilon = 0.9 * bound;
    const AttackResult r =
        fgsm(net, x, static_cast<int>(rng.index(k)), cfg);
    const Tensor za = matvec(w, x);
    const Tensor zb = matvec(w, r.adversarial);
    for (std::size_t i = 0; i < za.size(); ++i)
      ASSERT_EQ(sgn(za[i]), sgn(zb[i]));
    ++done;
  }
}

TEST(EpsilonBoundDeep, SingleLayerReducesToTwoLayerBound) {
  Rng rng(7);
  const Tensor w = random_matrix(rng, 4, 5);
  const Tensor x = random_vector(rng, 5);
  const Network net = single_layer_net(w);
  EXPECT_DOUBLE_EQ(theory::epsilon_bound_deep(net, x),
                   theory::epsilon_bound_two_layer(w, x));
}

TEST(EpsilonBoundDeep, IdentityTwoLayerNet) {
  const Network net = two_layer_net(Tensor::matrix(2, 2, {1, 0, 0, 1}),
                                    Tensor::matrix(2, 2, {1, 0, 0, 1}));
  EXPECT_DOUBLE_EQ(theory::epsilon_bound_deep(net, Tensor::vec({1, 2})), 1.0);
}

TEST(CheckSignPreservation, TrivialCases) {
  const Network net = single_layer_net(Tensor::matrix(1, 1, {1.0}));
  const Tensor x = Tensor::vec({1.0});
  EXPECT_TRUE(theory::check_sign_preservation(net, x, x).preserved);
  const auto rep =
      theory::check_sign_preservation(net, x, Tensor::vec({-1.0}));
  EXPECT_FALSE(rep.preserved);
  ASSERT_EQ(rep.flipped_per_layer.size(), 1u);
  EXPECT_EQ(rep.flipped_per_layer[0], 1u);
}

TEST(EpsilonBoundTargetedSingle, MatchesBruteForceFormula) {
  Rng rng(9);
  int done = 0;
  while (done < 200) {
    const std::size_t k = 2 + rng.index(5);
    const std::size_t n = 2 + rng.index(6);
    Tensor w({k, n});
    for (auto& v : w.data) v = 0.5 * rng.normal();
    Tensor x({n});
    for (auto& v : x.data) v = 0.5 * rng.normal();  // keeps raw exp in range
    const int t = static_cast<int>(rng.index(k));
    const auto bound = theory::epsilon_bound_targeted_single(w, x, t);
    if (!bound) continue;
    const double brute = oracles::brute_targeted_bound(w, x, t);
    EXPECT_NEAR(*bound, brute, 1e-10 * std::max(1.0, brute));
    ++done;
  }
}

TEST(EpsilonBoundTargetedSingle, StableForLargeLogits) {
  const Tensor w = Tensor::matrix(2, 2, {3.0, 1.0, -2.0, 4.0});
  const Tensor x = Tensor::vec({300.0, -150.0});  // raw exp would overflow
  const auto bound = theory::epsilon_bound_targeted_single(w, x, 1);
  ASSERT_TRUE(bound.has_value());
  EXPECT_TRUE(std::isfinite(*bound));
  EXPECT_GT(*bound, 0.0);
}

TEST(EpsilonBoundTargetedSingle, IdenticalRowsNotApplicable) {
  const Tensor w = Tensor::matrix(2, 3, {1, 2, 3, 1, 2, 3});
  EXPECT_FALSE(
      theory::epsilon_bound_targeted_single(w, Tensor::vec({1, 0, 1}), 1)
          .has_value());
}

TEST(EpsilonBoundTargetedSingle, EmpiricalLossDecrease) {
  Rng rng(10);
  int done = 0;
  while (done < 500) {
    const std::size_t k = 2 + rng.index(9);
    const std::size_t n = 2 + rng.index(20);
    const Tensor w = random_matrix(rng, k, n);
    const Tensor x = random_vector(rng, n);
    const int t = static_cast<int>(rng.index(k));
    const auto bound = theory::epsilon_bound_targeted_single(w, x, t);
    if (!bound) continue;
    const Network net = single_layer_net(w);
    AttackConfig cfg;
    cfg.epsilon = 0.9 * *bound;
    const AttackResult r = fgsm_targeted(net, x, t, cfg);
    ASSERT_LE(r.loss_after, r.loss_before + 1e-10);
    ++done;
  }
}

TEST(EpsilonBoundTargetedTwoLayer, ReducesWithIdentitySecondLayer) {
  // all pre-activations positive, V = I: the effective map equals W
  Rng rng(11);
  int done = 0;
  while (done < 50) {
    const std::size_t n = 2 + rng.index(6);
    const std::size_t k = 2 + rng.index(4);
    Tensor w({k, n});
    for (auto& v : w.data) v = std::abs(rng.normal()) + 0.05;
    Tensor x({n});
    for (auto& v : x.data) v = rng.uniform(0.1, 1.0);
    Tensor eye({k, k});
    for (std::size_t i = 0; i < k; ++i) eye.at2(i, i) = 1.0;
    const int t = static_cast<int>(rng.index(k));

    const auto single = theory::epsilon_bound_targeted_single(w, x, t);
    const auto both = theory::epsilon_bound_targeted_two_layer(w, eye, x, t);
    if (!single || !both) continue;
    const double u1 = theory::epsilon_bound_two_layer(w, x);
    EXPECT_NEAR(*both, std::min(u1, *single), 1e-12);
    ++done;
  }
}

TEST(EpsilonBoundTargetedTwoLayer, NeverExceedsU1) {
  Rng rng(12);
  int done = 0;
  while (done < 200) {
    const std::size_t n = 2 + rng.index(8);
    const std::size_t l = 2 + rng.index(8);
    const std::size_t k = 2 + rng.index(6);
    const Tensor w = random_matrix(rng, l, n);
    const Tensor v = random_matrix(rng, k, l);
    const Tensor x = random_vector(rng, n);
    const int t = static_cast<int>(rng.index(k));
    const auto bound = theory::epsilon_bound_targeted_two_layer(w, v, x, t);
    if (!bound) continue;
    double u1 = 0.0;
    try {
      u1 = theory::epsilon_bound_two_layer(w, x);
    } catch (const std::domain_error&) {
      continue;
    }
    EXPECT_LE(*bound, u1 + 1e-15);
    ++done;
  }
}

TEST(EpsilonBoundTargetedTwoLayer, EmpiricalTargetedLossDecrease) {
  Rng rng(13);
  int done = 0;
  while (done < 300) {
    const std::size_t n = 2 + rng.index(8);
    const std::size_t l = 2 + rng.index(8);
    const std::size_t k = 2 + rng.index(6);
    const Tensor w = random_matrix(rng, l, n);
    const Tensor v = random_matrix(rng, k, l);
    const Tensor x = random_vector(rng, n);
    const int t = static_cast<int>(rng.index(k));
    const auto bound = theory::epsilon_bound_targeted_two_layer(w, v, x, t);
    if (!bound) continue;
    const Network net = two_layer_net(w, v);
    AttackConfig cfg;
    cfg.epsilon = 0.9 * *bound;
    const AttackResult r = fgsm_targeted(net, x, t, cfg);
    ASSERT_LE(r.loss_after, r.loss_before + 1e-10);
    ++done;
  }
}

TEST(CBoundCw, HandComputedExample) {
  const Tensor w = Tensor::matrix(2, 2, {1, 0, 0, 1});
  const auto bound = theory::c_bound_cw(w, Tensor::vec({1.0, 0.0}), 0, 1);
  ASSERT_TRUE(bound.has_value());
  EXPECT_DOUBLE_EQ(*bound, 0.5);
}

TEST(CBoundCw, ScalesLinearlyWithInput) {
  Rng rng(14);
  int done = 0;
  while (done < 100) {
    const std::size_t k = 2 + rng.index(6);
    const std::size_t n = 2 + rng.index(8);
    const Tensor w = random_matrix(rng, k, n);
    const Tensor x = random_vector(rng, n);
    const int y = static_cast<int>(argmax(matvec(w, x)));
    int t = static_cast<int>(rng.index(k - 1));
    if (t >= y) ++t;
    const auto bound = theory::c_bound_cw(w, x, y, t);
    if (!bound) continue;
    Tensor x2 = x;
    for (auto& v : x2.data) v *= 2.0;
    const auto bound2 = theory::c_bound_cw(w, x2, y, t);
    ASSERT_TRUE(bound2.has_value());
    EXPECT_NEAR(*bound2, 2.0 * *bound, 1e-10 * std::max(1.0, *bound));
    ++done;
  }
}

TEST(CBoundCw, TwoClassSimplification) {
  Rng rng(15);
  int done = 0;
  while (done < 100) {
    const std::size_t n = 2 + rng.index(8);
    const Tensor w = random_matrix(rng, 2, n);
    const Tensor x = random_vector(rng, n);
    const Tensor z = matvec(w, x);
    const int y = z[0] > z[1] ? 0 : 1;
    const int t = 1 - y;
    const auto bound = theory::c_bound_cw(w, x, y, t);
    if (!bound) continue;
    double d2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = w.at2(static_cast<std::size_t>(y), j) -
                       w.at2(static_cast<std::size_t>(t), j);
      d2 += d * d;
    }
    const double gap = z[static_cast<std::size_t>(y)] -
                       z[static_cast<std::size_t>(t)];
    EXPECT_NEAR(*bound, gap / d2, 1e-12 * std::max(1.0, gap / d2));
    ++done;
  }
}

TEST(CBoundCw, NotApplicableWhenYNotArgmax) {
  const Tensor w = Tensor::matrix(2, 2, {1, 0, 0, 1});
  EXPECT_FALSE(theory::c_bound_cw(w, Tensor::vec({0.0, 1.0}), 0, 1).has_value());
  EXPECT_THROW(theory::c_bound_cw(w, Tensor::vec({1.0, 0.0}), 0, 0),
               std::invalid_argument);
}

TEST(RatioVerdict, UnchangedOnIdenticalInput) {
  const Tensor w = Tensor::matrix(2, 2, {1, 2, 3, 4});
  const Tensor x = Tensor::vec({0.5, 0.5});
  EXPECT_EQ(theory::ratio_verdict(w, x, x, 0, 1), RatioVerdict::Unchanged);
}

TEST(RatioVerdict, ClosedFormIncreasesWrongSignDecreases) {
  Rng rng(16);
  int done = 0;
  while (done < 500) {
    const std::size_t k = 2 + rng.index(9);
    const std::size_t n = 2 + rng.index(20);
    const Tensor w = random_matrix(rng, k, n);
    const Tensor x = random_vector(rng, n);
    const int y = static_cast<int>(argmax(matvec(w, x)));
    int t = static_cast<int>(rng.index(k - 1));
    if (t >= y) ++t;
    const auto bound = theory::c_bound_cw(w, x, y, t);
    if (!bound) continue;
    const double c = 0.9 * *bound;
    const Tensor delta = closed_form_cw_delta(w, x, y, t, c);
    Tensor fwd = x, rev = x;
    for (std::size_t j = 0; j < n; ++j) {
      fwd[j] += delta[j];
      rev[j] -= delta[j];
    }
    ASSERT_EQ(theory::ratio_verdict(w, x, fwd, y, t), RatioVerdict::Increased);
    ASSERT_EQ(theory::ratio_verdict(w, x, rev, y, t), RatioVerdict::Decreased);
    // argmax consistency under the bound
    ASSERT_EQ(argmax(matvec(w, fwd)), static_cast<std::size_t>(y));
    ++done;
  }
}

TEST(IrrelevantLabelDirection, WorkedThreeClassExamples) {
  // rows: y = (1,1,1), t = (1,0,1), k = (0,2,0) then k = (0,-1,0)
  const Tensor w_dec =
      Tensor::matrix(3, 3, {1, 1, 1, 1, 0, 1, 0, 2, 0});
  EXPECT_EQ(theory::irrelevant_label_direction(w_dec, 0, 1, 2),
            Direction::Decreases);
  const Tensor w_inc =
      Tensor::matrix(3, 3, {1, 1, 1, 1, 0, 1, 0, -1, 0});
  EXPECT_EQ(theory::irrelevant_label_direction(w_inc, 0, 1, 2),
            Direction::Increases);
}

TEST(IrrelevantLabelDirection, BoundaryAndCollisions) {
  const Tensor w = Tensor::matrix(3, 3, {1, 1, 1, 1, 0, 1, 1, 1, 1});
  EXPECT_EQ(theory::irrelevant_label_direction(w, 0, 1, 2),
            Direction::Boundary);  // row k equals row y
  EXPECT_THROW(theory::irrelevant_label_direction(w, 0, 1, 1),
               std::invalid_argument);
}

TEST(IrrelevantLabelDirection, PredictsMeasuredLogRatioChange) {
  Rng rng(17);
  int done = 0;
  while (done < 300) {
    const std::size_t k = 3 + rng.index(7);
    const std::size_t n = 2 + rng.index(10);
    const Tensor w = random_matrix(rng, k, n);
    const Tensor x = random_vector(rng, n);
    const int y = static_cast<int>(argmax(matvec(w, x)));
    int t = static_cast<int>(rng.index(k - 1));
    if (t >= y) ++t;
    const auto bound = theory::c_bound_cw(w, x, y, t);
    if (!bound) continue;
    int third = static_cast<int>(rng.index(k));
    while (third == y || third == t) third = static_cast<int>(rng.index(k));
    const Direction predicted =
        theory::irrelevant_label_direction(w, y, t, third);
    if (predicted == Direction::Boundary) continue;

    const Tensor delta = closed_form_cw_delta(w, x, y, t, 0.9 * *bound);
    Tensor x_prime = x;
    for (std::size_t j = 0; j < n; ++j) x_prime[j] += delta[j];
    const Tensor za = matvec(w, x);
    const Tensor zb = matvec(w, x_prime);
    const double measured =
        (zb[static_cast<std::size_t>(third)] - zb[static_cast<std::size_t>(y)]) -
        (za[static_cast<std::size_t>(third)] - za[static_cast<std::size_t>(y)]);
    if (predicted == Direction::Increases)
      ASSERT_GT(measured, 0.0);
    else
      ASSERT_LT(measured, 0.0);
    ++done;
  }
}

TEST(Suites, SmokeAllTheoremsHold) {
  for (const auto& id : theory::suite_ids()) {
    const auto res = theory::run_theorem_suite(id, 60, 42);
    EXPECT_EQ(res.summary.violated, 0u) << "theorem " << id;
    EXPECT_EQ(res.summary.trials, 60u);
    EXPECT_EQ(res.summary.holds + res.summary.violated,
              res.summary.applicable);
    EXPECT_EQ(res.reports.size(), 60u);
    EXPECT_GT(res.summary.applicable, 0u) << "theorem " << id;
  }
  EXPECT_THROW(theory::run_theorem_suite("9.9", 5, 1), std::invalid_argument);
}

TEST(Suites, ReportsCarryDigestsAndSeeds) {
  const auto res = theory::run_theorem_suite("3.1", 5, 123);
  for (std::size_t i = 0; i < res.reports.size(); ++i) {
    EXPECT_EQ(res.reports[i].seed, 123u + i);
    EXPECT_EQ(res.reports[i].inputs_digest.size(), 16u);
    EXPECT_EQ(res.reports[i].theorem_id, "3.1");
  }
  // same master seed reproduces identical reports
  const auto res2 = theory::run_theorem_suite("3.1", 5, 123);
  for (std::size_t i = 0; i < res.reports.size(); ++i) {
    EXPECT_EQ(res.reports[i].inputs_digest, res2.reports[i].inputs_digest);
    EXPECT_EQ(res.reports[i].epsilon_used, res2.reports[i].epsilon_used);
  }
}
