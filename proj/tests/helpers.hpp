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

#ifndef HQR_TESTS_HELPERS_HPP
#define HQR_TESTS_HELPERS_HPP

#include <Eigen/Dense>

#include "hqr/model.hpp"
#include "hqr/tree.hpp"

namespace hqr::testing {

inline double max_abs(const Eigen::MatrixXd& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

inline double identity_error(const Eigen::MatrixXd& gram) {
  return max_abs(gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
}

// Z-matrix of the beads under one tree node, columns in tree order, about
// the node's centroid.
inline Eigen::MatrixXd node_z(const BodyTree& tree, const BeadModel& model, int id) {
  const auto& nd = tree.node(id);
  Eigen::MatrixXd z(6, 3 * nd.n_beads);
  for (int i = nd.begin; i < nd.end; ++i) {
    const Vec3 r = model[static_cast<std::size_t>(tree.perm[static_cast<std::size_t>(i)])] - nd.centroid;
    z.block<3, 3>(0, 3 * (i - nd.begin)).setIdentity();
    z.block<3, 3>(3, 3 * (i - nd.begin)) = skew(r);
  }
  return z;
}

// [I ... I] / sqrt(m) over m beads.
inline Eigen::MatrixXd translation_rows(int m) {
  Eigen::MatrixXd t(3, 3 * m);
  for (int i = 0; i < m; ++i) t.block<3, 3>(0, 3 * i) = Mat3::Identity() / std::sqrt(double(m));
  return t;
}

}  // namespace hqr::testing

#endif  // HQR_TESTS_HELPERS_HPP
