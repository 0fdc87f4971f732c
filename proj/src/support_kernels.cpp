#include "graspkit/support_kernels.hpp"

#include <limits>

namespace grasp::kernels {

SupportMin support_min_scalar(const double* w, int d, int m, const double* dirs, int n) {
  SupportMin best;
  best.value = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n; ++j) {
    const double* dir = dirs + static_cast<std::size_t>(j) * d;
    double support = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      const double* col = w + static_cast<std::size_t>(i) * d;
      double dot = 0.0;
      for (int r = 0; r < d; ++r) dot += col[r] * dir[r];
      if (dot > support) support = dot;
    }
    if (support < best.value) {
      best.value = support;
      best.dir_index = j;
    }
  }
  return best;
}

SupportMinFn active_support_min() {
#if defined(GRASPKIT_X86_64)
  static const SupportMinFn fn = cpu_has_avx2() ? support_min_avx2 : support_min_scalar;
  return fn;
#elif defined(GRASPKIT_AARCH64)
  return support_min_neon;
#else
  return support_min_scalar;
#endif
}

const char* active_support_min_name() {
#if defined(GRASPKIT_X86_64)
  return cpu_has_avx2() ? "avx2" : "scalar";
#elif defined(GRASPKIT_AARCH64)
  return "neon";
#else
  return "scalar";
#endif
}

}  // namespace grasp::kernels
