#pragma once

#include <cmath>
#include <cstddef>

#include "advprobe/tensor.hpp"

namespace advprobe {

// Adam with bias-corrected first/second moments. The state belongs to one
// parameter tensor and is never shared.
struct AdamState {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  Tensor m;
  Tensor v;
  std::size_t step = 0;
};

// Advances the state by one gradient and returns the update to subtract
// from the parameters.
inline Tensor adam_step(AdamState& st, const Tensor& grad) {
  if (st.m.size() == 0) {
    st.m = Tensor(grad.shape);
    st.v = Tensor(grad.shape);
  }
  st.step += 1;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  Tensor update(grad.shape);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    st.m[i] = st.beta1 * st.m[i] + (1.0 - st.beta1) * grad[i];
    st.v[i] = st.beta2 * st.v[i] + (1.0 - st.beta2) * grad[i] * grad[i];
    const double mhat = st.m[i] / c1;
    const double vhat = st.v[i] / c2;
    update[i] = st.lr * mhat / (std::sqrt(vhat) + st.epsilon);
  }
  return update;
}

}  // namespace advprobe
