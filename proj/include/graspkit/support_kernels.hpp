#pragma once

#include <cstdint>

namespace grasp::kernels {

// Inner loop of the sampled inscribed-ball estimate: for a point set W
// (d x m, column-major) and a batch of directions (d x n, column-major),
// compute min over directions of max over columns of dot(w_col, dir).
//
// A scalar reference kernel and SIMD variants share this signature; the
// active variant is chosen once at startup from CPU features. Variants are
// equivalence-tested against the reference.
struct SupportMin {
  double value = 0.0;
  int dir_index = -1;
};

using SupportMinFn = SupportMin (*)(const double* w, int d, int m, const double* dirs,
                                    int n);

SupportMin support_min_scalar(const double* w, int d, int m, const double* dirs, int n);

#if defined(GRASPKIT_X86_64)
SupportMin support_min_avx2(const double* w, int d, int m, const double* dirs, int n);
bool cpu_has_avx2();
#endif
#if defined(GRASPKIT_AARCH64)
SupportMin support_min_neon(const double* w, int d, int m, const double* dirs, int n);
#endif

// Runtime-dispatched kernel and its name ("scalar", "avx2", "neon").
SupportMinFn active_support_min();
const char* active_support_min_name();

}  // namespace grasp::kernels
