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

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "hqr/generate.hpp"
#include "hqr/matfree.hpp"
#include "hqr/oracle.hpp"
#include "helpers.hpp"

namespace hqr {
namespace {

using testing::identity_error;

TEST(DenseComplement, TwoBeadsRankFive) {
  const BeadModel m({Vec3(0, 0, 1), Vec3(0, 0, -1)});
  const ZMatrix z = assemble_z(m, Vec3::Zero());
  const DenseComplement dc = dense_complement(z);
  EXPECT_EQ(dc.rank, 5);
  EXPECT_EQ(z_rank(z), 5);
  ASSERT_EQ(dc.qtilde_ref.rows(), 1);
  EXPECT_LE(max_abs(dc.qtilde_ref * z.entries.transpose()), 1e-15);
}

TEST(DenseComplement, RandomCloud) {
  const BeadModel m(generate_cloud(CloudKind::Uniform, 20, 3));
  const ZMatrix z = assemble_z(m, m.centroid());
  const DenseComplement dc = dense_complement(z);
  EXPECT_EQ(dc.rank, 6);
  ASSERT_EQ(dc.qtilde_ref.rows(), 54);
  EXPECT_LE(identity_error(dc.qtilde_ref * dc.qtilde_ref.transpose()), 1e-14);
  EXPECT_LE(max_abs(dc.qtilde_ref * z.entries.transpose()), 1e-14);
}

TEST(DenseComplement, CollinearCloudRankFive) {
  const BeadModel m(generate_cloud(CloudKind::Line, 10, 3));
  const ZMatrix z = assemble_z(m, m.centroid());
  EXPECT_EQ(z_rank(z), 5);
  const DenseComplement dc = dense_complement(z);
  EXPECT_EQ(dc.rank, 5);
  EXPECT_EQ(dc.qtilde_ref.rows(), 25);
}

TEST(DenseComplement, Guard) {
  const BeadModel m(generate_cloud(CloudKind::Uniform, 50, 3));
  try {
    dense_complement(assemble_z(m, m.centroid()), 100);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SizeGuard);
  }
}

TEST(ProjectorDistance, Examples) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(3, 6).topRows(2);
  EXPECT_EQ(projector_distance(a, a), 0.0);
  Eigen::MatrixXd rotated = a;
  rotated.row(0).swap(rotated.row(1));
  EXPECT_EQ(projector_distance(a, -rotated), 0.0);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Identity(6, 6).middleRows(2, 2);
  EXPECT_EQ(projector_distance(a, b), 1.0);
  try {
    projector_distance(a, Eigen::MatrixXd::Zero(2, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(ProjectorDistance, HierarchicalMatchesDense) {
  for (int n : {8, 16, 32, 64}) {
    const BodyOperator op(BeadModel(generate_cloud(CloudKind::Uniform, n, 40 + n)));
    const Eigen::MatrixXd qt = qtilde_rows(op.explicit_q());
    const DenseComplement dc = dense_complement(assemble_z(op.model(), op.model().centroid()));
    EXPECT_LE(projector_distance(qt, dc.qtilde_ref), 1e-10) << "n=" << n;
  }
}

TEST(NaiveBaseline, OrthogonalOnWellSpreadCloud) {
  const BeadModel m(generate_cloud(CloudKind::Uniform, 64, 1));
  const BodyTree tree = build_tree(m);
  const Eigen::MatrixXd q = naive_divide_conquer(tree, m);
  const double err = identity_error(q * q.transpose());
  EXPECT_TRUE(std::isfinite(err));
  EXPECT_LT(err, 1e-6);
}

TEST(NaiveBaseline, CollinearCloudIsSingular) {
  const BeadModel m(generate_cloud(CloudKind::Line, 32, 2));
  try {
    naive_divide_conquer(build_tree(m), m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularH);
  }
  // The stable factorization still completes.
  const BodyOperator op(m);
  EXPECT_LE(qqt_error(op.explicit_q()), 1e-12);
}

TEST(NaiveBaseline, NearCollinearIsWorseThanStable) {
  const BeadModel m(jitter(generate_cloud(CloudKind::Line, 64, 2), 1e-6, 3));
  const BodyTree tree = build_tree(m);
  const BodyOperator op(m);
  const double stable = qqt_error(op.explicit_q());
  try {
    const Eigen::MatrixXd q = naive_divide_conquer(tree, m);
    EXPECT_GE(identity_error(q * q.transpose()), 1e3 * std::max(stable, 1e-16));
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SingularH);
  }
}

TEST(Report, SkipsDenseChecksAboveGuard) {
  const auto rows = orthogonality_report({2, 200, 400}, 7, 900);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_TRUE(rows[1].qqt.has_value());
  EXPECT_FALSE(rows[2].qqt.has_value());
  EXPECT_TRUE(rows[2].qv_dev.has_value());
  for (const auto& r : rows) {
    EXPECT_LE(*r.roundtrip_qtq, 1e-12);
    EXPECT_LE(*r.roundtrip_qqt, 1e-12);
  }
}

TEST(Report, Deterministic) {
  std::ostringstream a;
  std::ostringstream b;
  write_report_csv(a, orthogonality_report({50, 100}, 3));
  write_report_csv(b, orthogonality_report({50, 100}, 3));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().substr(0, a.str().find('\n')), "n,qqt,qtq,qv_dev,qtv_dev,roundtrip_qtq,roundtrip_qqt");
}

TEST(Report, SingleBeadLeavesExplicitColumnsEmpty) {
  const BodyOperator op(BeadModel({Vec3(1, 0, 0)}));
  const OrthogonalityRow r = orthogonality_row(op, 1);
  EXPECT_EQ(r.n, 1);
  EXPECT_FALSE(r.qv_dev.has_value());
  EXPECT_EQ(*r.roundtrip_qtq, 0.0);
}

}  // namespace
}  // namespace hqr
