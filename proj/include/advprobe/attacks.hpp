#pragma once

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "advprobe/network.hpp"
#include "advprobe/optim.hpp"
#include "advprobe/tensor.hpp"

namespace advprobe {

struct CwParams {
  double c = 10.0;
  double kappa = 0.0;
  double learning_rate = 0.01;
  std::size_t steps = 10;
};

struct AttackConfig {
  double epsilon = 0.0;
  std::size_t iterations = 1;
  double clip_alpha = 0.0;  // clipped IFGSM only
  std::optional<int> target;
  CwParams cw;
};

struct AttackResult {
  Tensor adversarial;
  double loss_before = 0.0;
  double loss_after = 0.0;
  int label_before = 0;
  int label_after = 0;
  std::vector<double> per_step_losses;
  bool success = false;
};

namespace detail {

inline void check_epsilon(double eps) {
  if (!(eps >= 0.0))
    throw std::invalid_argument("attack: epsilon must be >= 0");
}

inline Tensor signed_step(const Tensor& x, const Tensor& grad, double eps,
                          double direction) {
  Tensor out = x;
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] += direction * eps * sgn(grad[i]);
  return out;
}

}  // namespace detail

// x' = x + eps * sign(grad L(x, y)). No box clipping: only the clipped
// variant and the CW attacks respect [0,1]^n.
inline AttackResult fgsm(const Network& net, const Tensor& x, int label,
                         const AttackConfig& cfg) {
  detail::check_epsilon(cfg.epsilon);
  AttackResult r;
  r.label_before = predict(net, x);
  r.loss_before = loss(net, x, label);
  const Tensor g = input_gradient(net, x, label);
  r.adversarial = detail::signed_step(x, g, cfg.epsilon, +1.0);
  r.loss_after = loss(net, r.adversarial, label);
  r.label_after = predict(net, r.adversarial);
  r.per_step_losses = {r.loss_after};
  r.success = r.label_after != r.label_before;
  return r;
}

// Iterated FGSM: x(m) = x(m-1) + eps * sign(grad L(x(m-1), y)).
inline AttackResult ifgsm(const Network& net, const Tensor& x, int label,
                          const AttackConfig& cfg) {
  detail::check_epsilon(cfg.epsilon);
  if (cfg.iterations < 1)
    throw std::invalid_argument("attack: iterations must be >= 1");
  AttackResult r;
  r.label_before = predict(net, x);
  r.loss_before = loss(net, x, label);
  Tensor cur = x;
  for (std::size_t m = 0; m < cfg.iterations; ++m) {
    const Tensor g = input_gradient(net, cur, label);
    cur = detail::signed_step(cur, g, cfg.epsilon, +1.0);
    r.per_step_losses.push_back(loss(net, cur, label));
  }
  r.adversarial = std::move(cur);
  r.loss_after = r.per_step_losses.back();
  r.label_after = predict(net, r.adversarial);
  r.success = r.label_after != r.label_before;
  return r;
}

// Clipped IFGSM: every step is clamped to
// [max(0, x - alpha), min(1, x + alpha)] around the original input.
inline AttackResult ifgsm_clipped(const Network& net, const Tensor& x,
                                  int label, const AttackConfig& cfg) {
  detail::check_epsilon(cfg.epsilon);
  if (cfg.iterations < 1)
    throw std::invalid_argument("attack: iterations must be >= 1");
  if (cfg.clip_alpha < 0.0)
    throw std::invalid_argument("attack: clip_alpha must be >= 0");
  if (cfg.clip_alpha < cfg.epsilon)
    std::cerr << "warning: clip_alpha " << cfg.clip_alpha
              << " below epsilon " << cfg.epsilon
              << "; steps will be truncated\n";
  Tensor lo(x.shape), hi(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) {
    lo[i] = std::max(0.0, x[i] - cfg.clip_alpha);
    hi[i] = std::min(1.0, x[i] + cfg.clip_alpha);
  }
  AttackResult r;
  r.label_before = predict(net, x);
  r.loss_before = loss(net, x, label);
  Tensor cur = x;
  for (std::size_t i = 0; i < cur.size(); ++i)
    cur[i] = std::min(std::max(cur[i], lo[i]), hi[i]);
  for (std::size_t m = 0; m < cfg.iterations; ++m) {
    const Tensor g = input_gradient(net, cur, label);
    cur = detail::signed_step(cur, g, cfg.epsilon, +1.0);
    for (std::size_t i = 0; i < cur.size(); ++i)
      cur[i] = std::min(std::max(cur[i], lo[i]), hi[i]);
    r.per_step_losses.push_back(loss(net, cur, label));
  }
  r.adversarial = std::move(cur);
  r.loss_after = r.per_step_losses.back();
  r.label_after = predict(net, r.adversarial);
  r.success = r.label_after != r.label_before;
  return r;
}

// Targeted FGSM: x' = x - eps * sign(grad L(x, e_t)). Success means the
// prediction lands on the target class.
inline AttackResult fgsm_targeted(const Network& net, const Tensor& x,
                                  int target, const AttackConfig& cfg) {
  detail::check_epsilon(cfg.epsilon);
  AttackResult r;
  r.label_before = predict(net, x);
  r.loss_before = loss(net, x, target);
  const Tensor g = input_gradient(net, x, target);
  r.adversarial = detail::signed_step(x, g, cfg.epsilon, -1.0);
  r.loss_after = loss(net, r.adversarial, target);
  r.label_after = predict(net, r.adversarial);
  r.per_step_losses = {r.loss_after};
  r.success = r.label_after == target;
  return r;
}

inline AttackResult ifgsm_targeted(const Network& net, const Tensor& x,
                                   int target, const AttackConfig& cfg) {
  detail::check_epsilon(cfg.epsilon);
  if (cfg.iterations < 1)
    throw std::invalid_argument("attack: iterations must be >= 1");
  AttackResult r;
  r.label_before = predict(net, x);
  r.loss_before = loss(net, x, target);
  Tensor cur = x;
  for (std::size_t m = 0; m < cfg.iterations; ++m) {
    const Tensor g = input_gradient(net, cur, target);
    cur = detail::signed_step(cur, g, cfg.epsilon, -1.0);
    r.per_step_losses.push_back(loss(net, cur, target));
  }
  r.adversarial = std::move(cur);
  r.loss_after = r.per_step_losses.back();
  r.label_after = predict(net, r.adversarial);
  r.success = r.label_after == target;
  return r;
}

namespace detail {

inline double l2_norm_sq_diff(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

struct CwObjective {
  double value;
  double margin;       // max_{i != t} Z_i - Z_t
  std::size_t best_i;  // argmax over i != t
};

inline CwObjective cw_objective(const Network& net, const Tensor& x_adv,
                                const Tensor& x, int target,
                                const CwParams& cw) {
  const Tensor logits = forward(net, x_adv).logits;
  const std::size_t t = static_cast<std::size_t>(target);
  double best = -std::numeric_limits<double>::infinity();
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (i == t) continue;
    if (logits[i] > best) {
      best = logits[i];
      best_i = i;
    }
  }
  CwObjective o;
  o.margin = best - logits[t];
  o.best_i = best_i;
  o.value = l2_norm_sq_diff(x_adv, x) + cw.c * std::max(-cw.kappa, o.margin);
  return o;
}

}  // namespace detail

// CW-L2: minimize ||x_adv - x||_2^2 + c * max(-kappa, max_{i!=t} Z_i - Z_t)
// over w with x_adv = (tanh(w) + 1) / 2, by Adam. Returns the lowest
// objective iterate seen; x_adv stays strictly inside (0,1)^n by
// construction. Inputs are pre-squeezed into [1e-6, 1 - 1e-6] so arctanh
// stays finite on the box boundary.
inline AttackResult cw_l2(const Network& net, const Tensor& x, int target,
                          const AttackConfig& cfg) {
  const CwParams& cw = cfg.cw;
  if (cw.c < 0.0) throw std::invalid_argument("cw_l2: c must be >= 0");
  if (cw.kappa < 0.0) throw std::invalid_argument("cw_l2: kappa must be >= 0");
  if (!(cw.learning_rate > 0.0))
    throw std::invalid_argument("cw_l2: learning_rate must be > 0");
  if (target < 0 || static_cast<std::size_t>(target) >= net.class_count)
    throw std::invalid_argument("cw_l2: target out of range");

  const std::size_t t = static_cast<std::size_t>(target);
  Tensor w(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = std::clamp(x[i], 1e-6, 1.0 - 1e-6);
    w[i] = std::atanh(2.0 * xi - 1.0);
  }

  const auto to_box = [](const Tensor& wv) {
    Tensor out(wv.shape);
    for (std::size_t i = 0; i < wv.size(); ++i)
      out[i] = 0.5 * (std::tanh(wv[i]) + 1.0);
    return out;
  };

  AdamState adam;
  adam.lr = cw.learning_rate;

  Tensor x_adv = to_box(w);
  auto obj = detail::cw_objective(net, x_adv, x, target, cw);
  Tensor best_adv = x_adv;
  double best_value = obj.value;

  AttackResult r;
  r.label_before = predict(net, x);
  r.loss_before = loss(net, x, target);

  for (std::size_t step = 0; step < cw.steps; ++step) {
    // d(objective)/d(x_adv); the margin term only contributes while it is
    // the active branch of the max.
    Tensor gx(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i)
      gx[i] = 2.0 * (x_adv[i] - x[i]);
    if (obj.margin > -cw.kappa && cw.c > 0.0) {
      Tensor seed({net.class_count});
      seed[obj.best_i] = 1.0;
      seed[t] -= 1.0;
      const Tensor gz = input_gradient_of_logits(net, x_adv, seed);
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] += cw.c * gz[i];
    }
    Tensor gw(x.shape);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double th = std::tanh(w[i]);
      gw[i] = gx[i] * 0.5 * (1.0 - th * th);
    }
    const Tensor upd = adam_step(adam, gw);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= upd[i];

    x_adv = to_box(w);
    obj = detail::cw_objective(net, x_adv, x, target, cw);
    r.per_step_losses.push_back(obj.value);
    if (obj.value < best_value) {
      best_value = obj.value;
      best_adv = x_adv;
    }
  }

  r.adversarial = std::move(best_adv);
  r.loss_after = loss(net, r.adversarial, target);
  r.label_after = predict(net, r.adversarial);
  r.success = r.label_after == target;
  return r;
}

// Exact minimizer of the relaxed one-layer CW problem (no box constraint):
// delta_j = -(c/2) (W[y,j] - W[t,j]). Valid below the corresponding c
// bound; a warning is emitted when the preconditions do not hold.
inline Tensor closed_form_cw_delta(const Tensor& w, const Tensor& x,
                                   int y_label, int target, double c) {
  if (w.rank() != 2) throw std::invalid_argument("closed_form_cw_delta: matrix required");
  if (y_label == target)
    throw std::invalid_argument("closed_form_cw_delta: y == t");
  if (y_label < 0 || static_cast<std::size_t>(y_label) >= w.rows() ||
      target < 0 || static_cast<std::size_t>(target) >= w.rows())
    throw std::invalid_argument("closed_form_cw_delta: label out of range");
  if (c < 0.0) throw std::invalid_argument("closed_form_cw_delta: c < 0");
  const Tensor z = matvec(w, x);
  if (argmax(z) != static_cast<std::size_t>(y_label))
    std::cerr << "warning: closed_form_cw_delta: y is not the argmax of Wx\n";
  Tensor delta({w.cols()});
  const std::size_t y = static_cast<std::size_t>(y_label);
  const std::size_t t = static_cast<std::size_t>(target);
  for (std::size_t j = 0; j < w.cols(); ++j)
    delta[j] = -(c / 2.0) * (w.at2(y, j) - w.at2(t, j));
  return delta;
}

// x' = x + eps * (x_adv - x); eps grades the attack strength of a CW
// adversarial.
inline Tensor interpolate_adversarial(const Tensor& x, const Tensor& x_adv,
                                      double eps) {
  if (x.shape != x_adv.shape)
    throw std::invalid_argument("interpolate_adversarial: shape mismatch");
  Tensor out(x.shape);
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = x[i] + eps * (x_adv[i] - x[i]);
  return out;
}

}  // namespace advprobe
