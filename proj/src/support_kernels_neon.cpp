// NEON variant of the support-minimum kernel: two directions per block.

#include <arm_neon.h>

#include <limits>

#include "graspkit/support_kernels.hpp"

namespace grasp::kernels {

SupportMin support_min_neon(const double* w, int d, int m, const double* dirs, int n) {
  constexpr int kMaxDim = 8;
  if (d > kMaxDim) return support_min_scalar(w, d, m, dirs, n);

  SupportMin best;
  best.value = std::numeric_limits<double>::infinity();

  int j = 0;
  float64x2_t lanes[kMaxDim];
  for (; j + 2 <= n; j += 2) {
    const double* d0 = dirs + static_cast<std::size_t>(j) * d;
    for (int r = 0; r < d; ++r) {
      const double pair[2] = {d0[r], d0[d + r]};
      lanes[r] = vld1q_f64(pair);
    }

    float64x2_t support = vdupq_n_f64(-std::numeric_limits<double>::infinity());
    for (int i = 0; i < m; ++i) {
      const double* col = w + static_cast<std::size_t>(i) * d;
      float64x2_t acc = vmulq_f64(vdupq_n_f64(col[0]), lanes[0]);
      for (int r = 1; r < d; ++r) acc = vfmaq_f64(acc, vdupq_n_f64(col[r]), lanes[r]);
      support = vmaxq_f64(support, acc);
    }

    double vals[2];
    vst1q_f64(vals, support);
    for (int lane = 0; lane < 2; ++lane) {
      if (vals[lane] < best.value) {
        best.value = vals[lane];
        best.dir_index = j + lane;
      }
    }
  }

  if (j < n) {
    const SupportMin tail =
        support_min_scalar(w, d, m, dirs + static_cast<std::size_t>(j) * d, n - j);
    if (tail.value < best.value) {
      best.value = tail.value;
      best.dir_index = j + tail.dir_index;
    }
  }
  return best;
}

}  // namespace grasp::kernels
