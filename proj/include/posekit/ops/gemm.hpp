// Copyright 2026 The Posekit Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>

namespace posekit::ops {

// C[M x N] += A[M x K] * B[K x N], all row-major with explicit leading
// dimensions. Rows of C are processed four at a time so each streamed row of
// B feeds four accumulators; the innermost loop over N vectorizes.
inline void sgemm_acc(std::size_t M, std::size_t N, std::size_t K,
                      const float* A, std::size_t lda,
                      const float* B, std::size_t ldb,
                      float* C, std::size_t ldc) {
  constexpr std::size_t kBlockK = 128;
  constexpr std::size_t kBlockN = 512;
  for (std::size_t j0 = 0; j0 < N; j0 += kBlockN) {
    const std::size_t jn = std::min(kBlockN, N - j0);
    for (std::size_t k0 = 0; k0 < K; k0 += kBlockK) {
      const std::size_t kn = std::min(kBlockK, K - k0);
      std::size_t i = 0;
      for (; i + 4 <= M; i += 4) {
        float* c0 = C + (i + 0) * ldc + j0;
        float* c1 = C + (i + 1) * ldc + j0;
        float* c2 = C + (i + 2) * ldc + j0;
        float* c3 = C + (i + 3) * ldc + j0;
        for (std::size_t k = k0; k < k0 + kn; ++k) {
          const float a0 = A[(i + 0) * lda + k];
          const float a1 = A[(i + 1) * lda + k];
          const float a2 = A[(i + 2) * lda + k];
          const float a3 = A[(i + 3) * lda + k];
          const float* b = B + k * ldb + j0;
          for (std::size_t j = 0; j < jn; ++j) {
            const float bv = b[j];
            c0[j] += a0 * bv;
            c1[j] += a1 * bv;
            c2[j] += a2 * bv;
            c3[j] += a3 * bv;
          }
        }
      }
      for (; i < M; ++i) {
        float* c = C + i * ldc + j0;
        for (std::size_t k = k0; k < k0 + kn; ++k) {
          const float a = A[i * lda + k];
          const float* b = B + k * ldb + j0;
          for (std::size_t j = 0; j < jn; ++j) c[j] += a * b[j];
        }
      }
    }
  }
}

}  // namespace posekit::ops
