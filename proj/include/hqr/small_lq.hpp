// Copyright 2026 The hqr Authors.
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

#ifndef HQR_SMALL_LQ_HPP
#define HQR_SMALL_LQ_HPP

#include <cmath>
#include <cstdint>

#include "hqr/common.hpp"

namespace hqr {

struct SmallLQ {
  Mat3 t;             // lower triangular, nonnegative diagonal
  SmallMatrix omega;  // k x k orthogonal
};

/// LQ factorization a = [t | 0] * omega of a 3 x k matrix (3 <= k <= 9),
/// computed as Householder QR of a^T. Rank-deficient input is fine: a zero
/// column simply skips its reflector and leaves a zero on the diagonal.
inline SmallLQ small_lq(const SmallMatrix& a) {
  const auto k = a.cols();
  if (a.rows() != 3 || k < 3 || k > 9) {
    throw Error(ErrorCode::ShapeMismatch, "small_lq expects a 3 x k matrix with 3 <= k <= 9");
  }
  SmallMatrix r = a.transpose();  // k x 3, reduced in place to [R; 0]
  SmallMatrix omega = SmallMatrix::Identity(k, k);
  std::uint64_t ops = 0;

  for (Eigen::Index j = 0; j < 3; ++j) {
    const Eigen::Index len = k - j;
    const double alpha = r.col(j).tail(len).norm();
    ops += 2 * static_cast<std::uint64_t>(len);
    if (alpha == 0.0) continue;

    SmallVector v = r.col(j).tail(len);
    const double head = v(0);
    const double diag = head >= 0.0 ? -alpha : alpha;
    v(0) -= diag;
    const double vnorm2 = v.squaredNorm();
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;

    for (Eigen::Index c = j + 1; c < 3; ++c) {
      const double s = beta * v.dot(r.col(c).tail(len));
      r.col(c).tail(len) -= s * v;
    }
    r(j, j) = diag;
    r.col(j).tail(len - 1).setZero();

    // omega <- H_j * omega; the reflectors accumulate as H_2 H_1 H_0.
    for (Eigen::Index c = 0; c < k; ++c) {
      const double s = beta * v.dot(omega.col(c).tail(len));
      omega.col(c).tail(len) -= s * v;
    }
    ops += static_cast<std::uint64_t>(4 * len * (2 - j) + 4 * len * k + 3 * len);
  }

  SmallLQ out{r.topRows(3).transpose(), std::move(omega)};
  for (int i = 0; i < 3; ++i) {
    if (out.t(i, i) < 0.0) {
      out.t.col(i) = -out.t.col(i);
      out.omega.row(i) = -out.omega.row(i);
    }
  }
  flops::add(ops);
  return out;
}

}  // namespace hqr

#endif  // HQR_SMALL_LQ_HPP
