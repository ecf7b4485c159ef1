#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "advprobe/attacks.hpp"
#include "advprobe/network.hpp"
#include "advprobe/rng.hpp"
#include "advprobe/tensor.hpp"
#include "advprobe/theory.hpp"

namespace advprobe {
namespace theory {

inline const std::vector<std::string>& suite_ids() {
  static const std::vector<std::string> ids = {
      "3.1", "3.2", "3.3-lemma", "3.3-deep", "4.1", "4.2", "7", "5.3"};
  return ids;
}

struct SuiteSummary {
  std::string theorem_id;
  std::size_t trials = 0;
  std::size_t applicable = 0;
  std::size_t holds = 0;
  std::size_t violated = 0;
  // 3.3-deep only: fraction of applicable trials where the formula's
  // epsilon preserved every sign (informational census).
  double census = -1.0;
};

struct SuiteResult {
  std::vector<BoundReport> reports;
  SuiteSummary summary;
};

namespace detail {

inline Tensor random_matrix(Rng& rng, std::size_t rows, std::size_t cols) {
  Tensor w({rows, cols});
  for (auto& v : w.data) v = rng.normal();
  return w;
}

inline Tensor random_vector(Rng& rng, std::size_t n) {
  Tensor x({n});
  for (auto& v : x.data) v = rng.normal();
  return x;
}

inline std::string digest_of(std::initializer_list<const Tensor*> tensors,
                             std::initializer_list<std::uint64_t> labels) {
  Fnv1a h;
  for (const Tensor* t : tensors) h.add(*t);
  for (auto l : labels) h.add(l);
  return h.hex();
}

// Exercised strictly below the strict-inequality thresholds.
inline constexpr double kBoundFraction = 0.9;

inline BoundReport trial_3_1(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t k = 2 + rng.index(9);    // [2, 10]
  const std::size_t n = 2 + rng.index(49);   // [2, 50]
  const Tensor w = random_matrix(rng, k, n);
  const Tensor x = random_vector(rng, n);
  const int label = static_cast<int>(rng.index(k));
  const double eps = rng.log_uniform(1e-3, 1.0);

  BoundReport rep;
  rep.theorem_id = "3.1";
  rep.seed = seed;
  rep.threshold = std::numeric_limits<double>::infinity();  // any eps > 0
  rep.epsilon_used = eps;
  rep.inputs_digest =
      digest_of({&w, &x}, {static_cast<std::uint64_t>(label)});

  const Network net = single_layer_net(w);
  AttackConfig cfg;
  cfg.epsilon = eps;
  const AttackResult res = fgsm(net, x, label, cfg);
  const double drop = res.loss_before - res.loss_after;
  rep.violation_magnitude = std::max(0.0, drop);
  rep.verdict = drop <= kNoiseTol ? Verdict::Holds : Verdict::Violated;
  return rep;
}

struct TwoLayerInstance {
  Tensor w, v, x;
  int label = 0;
  bool applicable = false;
  double bound = 0.0;
};

inline TwoLayerInstance gen_two_layer(Rng& rng) {
  TwoLayerInstance inst;
  const std::size_t n = 2 + rng.index(19);  // [2, 20]
  const std::size_t l = 2 + rng.index(19);
  const std::size_t k = 2 + rng.index(9);
  inst.w = random_matrix(rng, l, n);
  inst.v = random_matrix(rng, k, l);
  inst.x = random_vector(rng, n);
  inst.label = static_cast<int>(rng.index(k));
  try {
    inst.bound = epsilon_bound_two_layer(inst.w, inst.x);
    inst.applicable = true;
  } catch (const std::domain_error&) {
    inst.applicable = false;
  }
  return inst;
}

inline BoundReport trial_3_2(std::uint64_t seed, bool lemma_only) {
  Rng rng(seed);
  const TwoLayerInstance inst = gen_two_layer(rng);
  BoundReport rep;
  rep.theorem_id = lemma_only ? "3.3-lemma" : "3.2";
  rep.seed = seed;
  rep.inputs_digest = digest_of({&inst.w, &inst.v, &inst.x},
                                {static_cast<std::uint64_t>(inst.label)});
  if (!inst.applicable) {
    rep.condition_flags.push_back("zero pre-activation");
    rep.verdict = Verdict::NotApplicable;
    return rep;
  }
  rep.threshold = inst.bound;
  rep.epsilon_used = kBoundFraction * inst.bound;

  const Network net = two_layer_net(inst.w, inst.v);
  AttackConfig cfg;
  cfg.epsilon = rep.epsilon_used;
  const AttackResult res = fgsm(net, inst.x, inst.label, cfg);

  const Tensor za = matvec(inst.w, inst.x);
  const Tensor zb = matvec(inst.w, res.adversarial);
  bool layer1_preserved = true;
  for (std::size_t i = 0; i < za.size(); ++i)
    if (sgn(za[i]) != sgn(zb[i])) layer1_preserved = false;

  if (lemma_only) {
    rep.verdict = layer1_preserved ? Verdict::Holds : Verdict::Violated;
    if (!layer1_preserved) rep.violation_magnitude = 1.0;
    return rep;
  }
  const double drop = res.loss_before - res.loss_after;
  const bool loss_ok = drop <= kNoiseTol;
  rep.violation_magnitude = std::max(0.0, drop);
  rep.verdict =
      (layer1_preserved && loss_ok) ? Verdict::Holds : Verdict::Violated;
  if (!layer1_preserved) rep.condition_flags.push_back("sign flip");
  return rep;
}

inline BoundReport trial_3_3_deep(std::uint64_t seed, bool* preserved_out) {
  Rng rng(seed);
  const std::size_t n = 2 + rng.index(14);   // [2, 15]
  const std::size_t l1 = 2 + rng.index(14);
  const std::size_t l2 = 2 + rng.index(14);
  const std::size_t k = 2 + rng.index(9);
  std::vector<Tensor> ws;
  ws.push_back(random_matrix(rng, l1, n));
  ws.push_back(random_matrix(rng, l2, l1));
  ws.push_back(random_matrix(rng, k, l2));
  const Tensor x = random_vector(rng, n);
  const int label = static_cast<int>(rng.index(k));

  BoundReport rep;
  rep.theorem_id = "3.3-deep";
  rep.seed = seed;
  rep.inputs_digest = digest_of({&ws[0], &ws[1], &ws[2], &x},
                                {static_cast<std::uint64_t>(label)});
  const Network net = mlp_net(std::move(ws));
  double bound = 0.0;
  try {
    bound = epsilon_bound_deep(net, x);
  } catch (const std::domain_error&) {
    rep.condition_flags.push_back("zero pre-activation");
    rep.verdict = Verdict::NotApplicable;
    return rep;
  }
  rep.threshold = bound;
  rep.epsilon_used = kBoundFraction * bound;

  AttackConfig cfg;
  cfg.epsilon = rep.epsilon_used;
  const AttackResult res = fgsm(net, x, label, cfg);
  const bool preserved =
      check_sign_preservation(net, x, res.adversarial).preserved;
  if (preserved_out) *preserved_out = preserved;
  if (!preserved) {
    // The theorem only speaks about attacks that keep every sign; the
    // unconditional rate is reported in the summary census.
    rep.condition_flags.push_back("sign flip");
    rep.verdict = Verdict::NotApplicable;
    return rep;
  }
  const double drop = res.loss_before - res.loss_after;
  rep.violation_magnitude = std::max(0.0, drop);
  rep.verdict = drop <= kNoiseTol ? Verdict::Holds : Verdict::Violated;
  return rep;
}

inline BoundReport trial_4_1(std::uint64_t seed) {
  Rng rng(seed);
  const std::size_t k = 2 + rng.index(9);
  const std::size_t n = 2 + rng.index(49);
  const Tensor w = random_matrix(rng, k, n);
  const Tensor x = random_vector(rng, n);
  const int target = static_cast<int>(rng.index(k));

  BoundReport rep;
  rep.theorem_id = "4.1";
  rep.seed = seed;
  rep.inputs_digest = digest_of({&w, &x}, {static_cast<std::uint64_t>(target)});
  const auto bound = epsilon_bound_targeted_single(w, x, target);
  if (!bound) {
    rep.condition_flags.push_back("zero gradient element");
    rep.verdict = Verdict::NotApplicable;
    return rep;
  }
  rep.threshold = *bound;
  rep.epsilon_used = kBoundFraction * *bound;

  const Network net = single_layer_net(w);
  AttackConfig cfg;
  cfg.epsilon = rep.epsilon_used;
  const AttackResult res = fgsm_targeted(net, x, target, cfg);
  const double rise = res.loss_after - res.loss_before;
  rep.violation_magnitude = std::max(0.0, rise);
  rep.verdict = rise <= kNoiseTol ? Verdict::Holds : Verdict::Violated;
  return rep;
}

inline BoundReport trial_4_2(std::uint64_t seed) {
  Rng rng(seed);
  const TwoLayerInstance inst = gen_two_layer(rng);
  const std::size_t k = inst.v.rows();
  const int target = static_cast<int>(rng.index(k));

  BoundReport rep;
  rep.theorem_id = "4.2";
  rep.seed = seed;
  rep.inputs_digest = digest_of({&inst.w, &inst.v, &inst.x},
                                {static_cast<std::uint64_t>(target)});
  const auto bound =
      epsilon_bound_targeted_two_layer(inst.w, inst.v, inst.x, target);
  if (!bound) {
    rep.condition_flags.push_back("hypothesis failure");
    rep.verdict = Verdict::NotApplicable;
    return rep;
  }
  rep.threshold = *bound;
  rep.epsilon_used = kBoundFraction * *bound;

  const Network net = two_layer_net(inst.w, inst.v);
  AttackConfig cfg;
  cfg.epsilon = rep.epsilon_used;
  const AttackResult res = fgsm_targeted(net, inst.x, target, cfg);
  const double rise = res.loss_after - res.loss_before;
  rep.violation_magnitude = std::max(0.0, rise);
  rep.verdict = rise <= kNoiseTol ? Verdict::Holds : Verdict::Violated;
  return rep;
}

struct CwInstance {
  Tensor w, x;
  int y = 0;
  int target = 0;
  bool applicable = false;
  double bound = 0.0;
};

inline CwInstance gen_cw(Rng& rng, std::size_t min_k) {
  CwInstance inst;
  const std::size_t k = min_k + rng.index(11 - min_k);  // [min_k, 10]
  const std::size_t n = 2 + rng.index(49);
  inst.w = random_matrix(rng, k, n);
  inst.x = random_vector(rng, n);
  inst.y = static_cast<int>(argmax(matvec(inst.w, inst.x)));
  inst.target = static_cast<int>(rng.index(k - 1));
  if (inst.target >= inst.y) ++inst.target;
  const auto bound = c_bound_cw(inst.w, inst.x, inst.y, inst.target);
  if (bound) {
    inst.applicable = true;
    inst.bound = *bound;
  }
  return inst;
}

inline BoundReport trial_7(std::uint64_t seed) {
  Rng rng(seed);
  const CwInstance inst = gen_cw(rng, 2);
  BoundReport rep;
  rep.theorem_id = "7";
  rep.seed = seed;
  rep.inputs_digest =
      digest_of({&inst.w, &inst.x}, {static_cast<std::uint64_t>(inst.y),
                                     static_cast<std::uint64_t>(inst.target)});
  if (!inst.applicable) {
    rep.condition_flags.push_back("hypothesis failure");
    rep.verdict = Verdict::NotApplicable;
    return rep;
  }
  rep.threshold = inst.bound;
  const double c = kBoundFraction * inst.bound;
  rep.epsilon_used = c;

  const Tensor delta =
      closed_form_cw_delta(inst.w, inst.x, inst.y, inst.target, c);
  Tensor x_prime = inst.x;
  for (std::size_t i = 0; i < x_prime.size(); ++i) x_prime[i] += delta[i];

  const bool increased =
      ratio_verdict(inst.w, inst.x, x_prime, inst.y, inst.target) ==
      RatioVerdict::Increased;
  const bool argmax_kept =
      argmax(matvec(inst.w, x_prime)) == static_cast<std::size_t>(inst.y);
  rep.verdict =
      (increased && argmax_kept) ? Verdict::Holds : Verdict::Violated;
  if (rep.verdict == Verdict::Violated) {
    const Tensor za = matvec(inst.w, inst.x);
    const Tensor zb = matvec(inst.w, x_prime);
    rep.violation_magnitude =
        (za[static_cast<std::size_t>(inst.target)] - za[static_cast<std::size_t>(inst.y)]) -
        (zb[static_cast<std::size_t>(inst.target)] - zb[static_cast<std::size_t>(inst.y)]);
    if (!argmax_kept) rep.condition_flags.push_back("argmax lost");
  }
  return rep;
}

inline BoundReport trial_5_3(std::uint64_t seed) {
  Rng rng(seed);
  const CwInstance inst = gen_cw(rng, 3);
  BoundReport rep;
  rep.theorem_id = "5.3";
  rep.seed = seed;
  rep.inputs_digest =
      digest_of({&inst.w, &inst.x}, {static_cast<std::uint64_t>(inst.y),
                                     static_cast<std::uint64_t>(inst.target)});
  if (!inst.applicable) {
    rep.condition_flags.push_back("hypothesis failure");
    rep.verdict = Verdict::NotApplicable;
    return rep;
  }
  const std::size_t k_classes = inst.w.rows();
  int third = static_cast<int>(rng.index(k_classes));
  while (third == inst.y || third == inst.target)
    third = static_cast<int>(rng.index(k_classes));

  rep.threshold = inst.bound;
  const double c = kBoundFraction * inst.bound;
  rep.epsilon_used = c;

  const Direction predicted =
      irrelevant_label_direction(inst.w, inst.y, inst.target, third);
  if (predicted == Direction::Boundary) {
    rep.condition_flags.push_back("boundary");
    rep.verdict = Verdict::NotApplicable;
    return rep;
  }
  const Tensor delta =
      closed_form_cw_delta(inst.w, inst.x, inst.y, inst.target, c);
  Tensor x_prime = inst.x;
  for (std::size_t i = 0; i < x_prime.size(); ++i) x_prime[i] += delta[i];
  const Tensor za = matvec(inst.w, inst.x);
  const Tensor zb = matvec(inst.w, x_prime);
  const std::size_t yk = static_cast<std::size_t>(inst.y);
  const std::size_t kk = static_cast<std::size_t>(third);
  const double measured = (zb[kk] - zb[yk]) - (za[kk] - za[yk]);

  const bool agree = (predicted == Direction::Increases && measured > 0.0) ||
                     (predicted == Direction::Decreases && measured < 0.0);
  rep.verdict = agree ? Verdict::Holds : Verdict::Violated;
  if (!agree) rep.violation_magnitude = std::abs(measured);
  return rep;
}

}  // namespace detail

// Runs one theorem's randomized suite. Trial i draws everything from a
// generator seeded with master_seed + i, so results do not depend on
// execution order.
inline SuiteResult run_theorem_suite(const std::string& theorem_id,
                                     std::size_t trials,
                                     std::uint64_t master_seed) {
  SuiteResult out;
  out.summary.theorem_id = theorem_id;
  out.summary.trials = trials;
  std::size_t preserved_count = 0;
  std::size_t preservation_denominator = 0;

  for (std::size_t i = 0; i < trials; ++i) {
    const std::uint64_t seed = master_seed + i;
    BoundReport rep;
    if (theorem_id == "3.1") {
      rep = detail::trial_3_1(seed);
    } else if (theorem_id == "3.2") {
      rep = detail::trial_3_2(seed, /*lemma_only=*/false);
    } else if (theorem_id == "3.3-lemma") {
      rep = detail::trial_3_2(seed, /*lemma_only=*/true);
    } else if (theorem_id == "3.3-deep") {
      bool preserved = false;
      rep = detail::trial_3_3_deep(seed, &preserved);
      const bool hypothesis_ok =
          rep.condition_flags.empty() || rep.condition_flags[0] != "zero pre-activation";
      if (hypothesis_ok) {
        ++preservation_denominator;
        if (preserved) ++preserved_count;
      }
    } else if (theorem_id == "4.1") {
      rep = detail::trial_4_1(seed);
    } else if (theorem_id == "4.2") {
      rep = detail::trial_4_2(seed);
    } else if (theorem_id == "7") {
      rep = detail::trial_7(seed);
    } else if (theorem_id == "5.3") {
      rep = detail::trial_5_3(seed);
    } else {
      throw std::invalid_argument("unknown theorem id: " + theorem_id);
    }
    if (rep.verdict != Verdict::NotApplicable) ++out.summary.applicable;
    if (rep.verdict == Verdict::Holds) ++out.summary.holds;
    if (rep.verdict == Verdict::Violated) ++out.summary.violated;
    out.reports.push_back(std::move(rep));
  }
  if (theorem_id == "3.3-deep" && preservation_denominator > 0)
    out.summary.census = static_cast<double>(preserved_count) /
                         static_cast<double>(preservation_denominator);
  return out;
}

}  // namespace theory
}  // namespace advprobe
