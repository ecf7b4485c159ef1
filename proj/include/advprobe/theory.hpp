#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "advprobe/network.hpp"
#include "advprobe/tensor.hpp"

namespace advprobe {
namespace theory {

// |value| at or below this counts as zero when checking the "no zero
// elements" hypotheses; near-zeros become not-applicable instead of
// silently passing.
inline constexpr double kNonzeroTol = 1e-12;

// Loss differences smaller than this are float noise, not violations.
inline constexpr double kNoiseTol = 1e-10;

enum class Verdict { Holds, Violated, NotApplicable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "holds";
    case Verdict::Violated: return "violated";
    default: return "not_applicable";
  }
}

// One empirical check of one theorem instance.
struct BoundReport {
  std::string theorem_id;
  double threshold = 0.0;     // computed epsilon or c bound
  double epsilon_used = 0.0;  // strength actually applied (0.9 x threshold)
  std::string inputs_digest;
  std::vector<std::string> condition_flags;
  Verdict verdict = Verdict::NotApplicable;
  double violation_magnitude = 0.0;
  std::uint64_t seed = 0;
};

// Untargeted two-layer bound: |Wx|_min / ||W||_inf, requiring every
// element of Wx nonzero.
inline double epsilon_bound_two_layer(const Tensor& w, const Tensor& x) {
  const Tensor z = matvec(w, x);
  double zmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z.size(); ++i)
    zmin = std::min(zmin, std::abs(z[i]));
  if (!(zmin > kNonzeroTol))
    throw std::domain_error("hypothesis violated: zero pre-activation");
  return zmin / inf_norm(w);
}

// Deep-net bound: min over layers of |Tmp_j|_min / ||W_j||_inf, with conv
// layers taken through their explicit matrix. The pre-activations come
// from the clean forward pass.
inline double epsilon_bound_deep(const Network& net, const Tensor& x) {
  const auto fwd = forward(net, x);
  const auto mats = layer_matrices(net);
  if (mats.size() != fwd.trace.pre_activations.size())
    throw std::logic_error("epsilon_bound_deep: trace/matrix count mismatch");
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < mats.size(); ++j) {
    const Tensor& tmp = fwd.trace.pre_activations[j];
    double tmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < tmp.size(); ++i)
      tmin = std::min(tmin, std::abs(tmp[i]));
    if (!(tmin > kNonzeroTol))
      throw std::domain_error("hypothesis violated: zero pre-activation in layer " +
                              std::to_string(j));
    bound = std::min(bound, tmin / inf_norm(mats[j]));
  }
  return bound;
}

struct SignPreservationReport {
  bool preserved = true;
  std::vector<std::size_t> flipped_per_layer;  // one count per parametric layer
};

// True iff every pre-activation entry keeps its sign (sign(0) = 0)
// between x and x_prime.
inline SignPreservationReport check_sign_preservation(const Network& net,
                                                      const Tensor& x,
                                                      const Tensor& x_prime) {
  const auto a = forward(net, x).trace.pre_activations;
  const auto b = forward(net, x_prime).trace.pre_activations;
  SignPreservationReport rep;
  rep.flipped_per_layer.resize(a.size(), 0);
  for (std::size_t j = 0; j < a.size(); ++j) {
    for (std::size_t i = 0; i < a[j].size(); ++i)
      if (sgn(a[j][i]) != sgn(b[j][i])) ++rep.flipped_per_layer[j];
    if (rep.flipped_per_layer[j] > 0) rep.preserved = false;
  }
  return rep;
}

namespace detail {

// Shared core of the targeted single-layer bound:
//   min_i (1/||W||_inf) ln(1 + |A_i| / B_i)
// with A_i = sum_j exp(Wx)_j (w_ji - w_ti) and
//      B_i = sum_j |w_ji - w_ti| exp(Wx)_j.
// The exp terms are max-subtracted; the A/B ratio is invariant to the
// common shift. Returns nullopt when some gradient coordinate vanishes
// (A_i / sum_j exp(Wx)_j within tolerance of zero).
inline std::optional<double> targeted_bound_core(const Tensor& w,
                                                 const Tensor& x, int target) {
  if (w.rank() != 2) throw std::invalid_argument("targeted bound: matrix required");
  if (target < 0 || static_cast<std::size_t>(target) >= w.rows())
    throw std::invalid_argument("targeted bound: target out of range");
  const std::size_t k = w.rows(), n = w.cols();
  const std::size_t t = static_cast<std::size_t>(target);
  const Tensor z = matvec(w, x);
  const double zmax = *std::max_element(z.data.begin(), z.data.end());
  std::vector<double> e(k);
  double esum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    e[j] = std::exp(z[j] - zmax);
    esum += e[j];
  }
  const double wn = inf_norm(w);
  if (!(wn > 0.0)) return std::nullopt;

  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    double a = 0.0, b = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double d = w.at2(j, i) - w.at2(t, i);
      a += e[j] * d;
      b += e[j] * std::abs(d);
    }
    // a / esum is exactly d/dx_i of the targeted cross-entropy loss.
    if (std::abs(a / esum) <= kNonzeroTol) return std::nullopt;
    bound = std::min(bound, std::log(1.0 + std::abs(a) / b) / wn);
  }
  return bound;
}

}  // namespace detail

// Targeted single-layer bound; not applicable when grad L(x, e_t) has a
// zero element.
inline std::optional<double> epsilon_bound_targeted_single(const Tensor& w,
                                                           const Tensor& x,
                                                           int target) {
  return detail::targeted_bound_core(w, x, target);
}

// Targeted two-layer bound U = min(U1, U2): U1 keeps the first-layer
// activation pattern fixed, U2 applies the single-layer bound to the
// effective linear map T with t_ji = sum_{a in A} v_ja w_ai over the
// active set A = {i : (Wx)_i > 0}.
inline std::optional<double> epsilon_bound_targeted_two_layer(const Tensor& w,
                                                              const Tensor& v,
                                                              const Tensor& x,
                                                              int target) {
  if (w.rank() != 2 || v.rank() != 2 || v.cols() != w.rows())
    throw std::invalid_argument("targeted two-layer bound: shape mismatch");
  const Tensor z1 = matvec(w, x);
  double zmin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z1.size(); ++i)
    zmin = std::min(zmin, std::abs(z1[i]));
  if (!(zmin > kNonzeroTol)) return std::nullopt;
  const double u1 = zmin / inf_norm(w);

  Tensor t({v.rows(), w.cols()});
  for (std::size_t a = 0; a < w.rows(); ++a) {
    if (!(z1[a] > 0.0)) continue;
    for (std::size_t j = 0; j < v.rows(); ++j)
      for (std::size_t i = 0; i < w.cols(); ++i)
        t.at2(j, i) += v.at2(j, a) * w.at2(a, i);
  }
  const auto u2 = detail::targeted_bound_core(t, x, target);
  if (!u2) return std::nullopt;
  return std::min(u1, *u2);
}

// CW multiplier bound:
//   c < min_{j != y} ((Wx)_y - (Wx)_j)^2 /
//                    (||W_y - W_j||_2^2 ((Wx)_y - (Wx)_t)).
// Not applicable when y is not the strict argmax of Wx or when every
// j != y has a row identical to y (each such j contributes +inf and is
// skipped).
inline std::optional<double> c_bound_cw(const Tensor& w, const Tensor& x,
                                        int y_label, int target) {
  if (w.rank() != 2) throw std::invalid_argument("c_bound_cw: matrix required");
  if (y_label == target) throw std::invalid_argument("c_bound_cw: y == t");
  if (y_label < 0 || static_cast<std::size_t>(y_label) >= w.rows() ||
      target < 0 || static_cast<std::size_t>(target) >= w.rows())
    throw std::invalid_argument("c_bound_cw: label out of range");
  const std::size_t y = static_cast<std::size_t>(y_label);
  const std::size_t t = static_cast<std::size_t>(target);
  const Tensor z = matvec(w, x);
  for (std::size_t j = 0; j < z.size(); ++j)
    if (j != y && !(z[y] > z[j])) return std::nullopt;

  const double gap_t = z[y] - z[t];
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < w.rows(); ++j) {
    if (j == y) continue;
    double d2 = 0.0;
    for (std::size_t i = 0; i < w.cols(); ++i) {
      const double d = w.at2(y, i) - w.at2(j, i);
      d2 += d * d;
    }
    if (d2 == 0.0) continue;  // identical rows contribute +inf
    const double gap_j = z[y] - z[j];
    bound = std::min(bound, gap_j * gap_j / (d2 * gap_t));
  }
  if (!std::isfinite(bound)) return std::nullopt;
  return bound;
}

enum class RatioVerdict { Increased, Decreased, Unchanged };

inline const char* to_string(RatioVerdict v) {
  switch (v) {
    case RatioVerdict::Increased: return "increased";
    case RatioVerdict::Decreased: return "decreased";
    default: return "unchanged";
  }
}

// Compares (Wx')_t - (Wx')_y against (Wx)_t - (Wx)_y. The log-ratio form
// is exactly the probability-ratio comparison and never overflows.
inline RatioVerdict ratio_verdict(const Tensor& w, const Tensor& x,
                                  const Tensor& x_prime, int y_label,
                                  int target) {
  const Tensor za = matvec(w, x);
  const Tensor zb = matvec(w, x_prime);
  const std::size_t y = static_cast<std::size_t>(y_label);
  const std::size_t t = static_cast<std::size_t>(target);
  const double before = za[t] - za[y];
  const double after = zb[t] - zb[y];
  if (after > before) return RatioVerdict::Increased;
  if (after < before) return RatioVerdict::Decreased;
  return RatioVerdict::Unchanged;
}

enum class Direction { Increases, Decreases, Boundary };

inline const char* to_string(Direction d) {
  switch (d) {
    case Direction::Increases: return "increases";
    case Direction::Decreases: return "decreases";
    default: return "boundary";
  }
}

// Direction of the relative probability of a third label k under the
// closed-form CW delta: it increases iff
// (W_k - W_y) . (W_y - W_t) < 0.
inline Direction irrelevant_label_direction(const Tensor& w, int y_label,
                                            int target, int k_label) {
  if (k_label == y_label || k_label == target || y_label == target)
    throw std::invalid_argument("irrelevant_label_direction: label collision");
  if (w.rank() != 2)
    throw std::invalid_argument("irrelevant_label_direction: matrix required");
  const std::size_t y = static_cast<std::size_t>(y_label);
  const std::size_t t = static_cast<std::size_t>(target);
  const std::size_t k = static_cast<std::size_t>(k_label);
  if (y >= w.rows() || t >= w.rows() || k >= w.rows())
    throw std::invalid_argument("irrelevant_label_direction: label out of range");
  double inner = 0.0;
  for (std::size_t j = 0; j < w.cols(); ++j)
    inner += (w.at2(k, j) - w.at2(y, j)) * (w.at2(y, j) - w.at2(t, j));
  if (std::abs(inner) <= kNonzeroTol) return Direction::Boundary;
  return inner < 0.0 ? Direction::Increases : Direction::Decreases;
}

}  // namespace theory
}  // namespace advprobe
