// AVX2/FMA variant of the support-minimum kernel. Directions are processed
// four per block; per-block the direction components are transposed into
// lane-wise registers so the column loop runs on broadcast-FMA only.

#include <immintrin.h>

#include <limits>

#include "graspkit/support_kernels.hpp"

namespace grasp::kernels {

bool cpu_has_avx2() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

SupportMin support_min_avx2(const double* w, int d, int m, const double* dirs, int n) {
  constexpr int kMaxDim = 8;
  if (d > kMaxDim) return support_min_scalar(w, d, m, dirs, n);

  SupportMin best;
  best.value = std::numeric_limits<double>::infinity();

  int j = 0;
  __m256d lanes[kMaxDim];
  for (; j + 4 <= n; j += 4) {
    const double* d0 = dirs + static_cast<std::size_t>(j) * d;
    for (int r = 0; r < d; ++r)
      lanes[r] = _mm256_set_pd(d0[3 * d + r], d0[2 * d + r], d0[1 * d + r], d0[r]);

    __m256d support = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
    for (int i = 0; i < m; ++i) {
      const double* col = w + static_cast<std::size_t>(i) * d;
      __m256d acc = _mm256_mul_pd(_mm256_set1_pd(col[0]), lanes[0]);
      for (int r = 1; r < d; ++r)
        acc = _mm256_fmadd_pd(_mm256_set1_pd(col[r]), lanes[r], acc);
      support = _mm256_max_pd(support, acc);
    }

    alignas(32) double vals[4];
    _mm256_store_pd(vals, support);
    for (int lane = 0; lane < 4; ++lane) {
      if (vals[lane] < best.value) {
        best.value = vals[lane];
        best.dir_index = j + lane;
      }
    }
  }

  if (j < n) {
    const SupportMin tail = support_min_scalar(w, d, m, dirs + static_cast<std::size_t>(j) * d, n - j);
    if (tail.value < best.value) {
      best.value = tail.value;
      best.dir_index = j + tail.dir_index;
    }
  }
  return best;
}

}  // namespace grasp::kernels
