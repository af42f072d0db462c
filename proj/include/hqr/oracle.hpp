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

#ifndef HQR_ORACLE_HPP
#define HQR_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "hqr/common.hpp"
#include "hqr/factor.hpp"
#include "hqr/generate.hpp"
#include "hqr/matfree.hpp"
#include "hqr/model.hpp"
#include "hqr/tree.hpp"

namespace hqr {

inline double max_abs(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Numerical rank of a Z-matrix from its singular values.
inline int z_rank(const ZMatrix& z, double rel_tol = 1e-10) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(z.entries.transpose());
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rel_tol * s(0)) ++rank;
  }
  return rank;
}

struct DenseComplement {
  Eigen::MatrixXd qtilde_ref;  // (3n - rank) x 3n, orthonormal rows
  int rank = 0;
};

/// Orthonormal basis of the complement of rowspace(Z) from a full
/// column-pivoted Householder QR of Z^T.
inline DenseComplement dense_complement(const ZMatrix& z, int dense_guard = kDefaultDenseGuard) {
  const Eigen::Index dim = z.entries.cols();
  if (dim > dense_guard) {
    throw Error(ErrorCode::SizeGuard, "3n = " + std::to_string(dim) + " exceeds dense guard " +
                                          std::to_string(dense_guard));
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z.entries.transpose());
  qr.setThreshold(1e-10);
  DenseComplement out;
  out.rank = static_cast<int>(qr.rank());
  const Eigen::MatrixXd q = qr.householderQ();
  out.qtilde_ref = q.rightCols(dim - out.rank).transpose();
  return out;
}

/// max |a^T a - b^T b|: zero iff both row sets span the same subspace.
inline double projector_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorCode::ShapeMismatch, "projector_distance: column counts differ");
  }
  const Eigen::MatrixXd pa = a.transpose() * a;
  const Eigen::MatrixXd pb = b.transpose() * b;
  return max_abs(pa - pb);
}

/// Rows 7..3n of an explicit Q in original column order.
inline Eigen::MatrixXd qtilde_rows(const HierQ& q, int dense_guard = kDefaultDenseGuard) {
  const Eigen::MatrixXd dense = materialize_dense(q, ColumnOrder::Original, dense_guard);
  return dense.bottomRows(dense.rows() - 6);
}

/// max |Q Q^T - I| exploiting that residue blocks only overlap their
/// ancestors and the root rows.
inline double qqt_error(const HierQ& q) {
  double err = max_abs(q.root_rows * q.root_rows.transpose() - Eigen::MatrixXd::Identity(6, 6));
  for (const auto& b : q.blocks) {
    const auto w = b.rows.cols();
    const auto r = b.rows.rows();
    err = std::max(err, max_abs(b.rows * b.rows.transpose() - Eigen::MatrixXd::Identity(r, r)));
    err = std::max(err, max_abs(q.root_rows.middleCols(b.col_offset, w) * b.rows.transpose()));
    for (int a = b.parent_block; a >= 0; a = q.blocks[static_cast<std::size_t>(a)].parent_block) {
      const auto& anc = q.blocks[static_cast<std::size_t>(a)];
      err = std::max(err, max_abs(anc.rows.middleCols(b.col_offset - anc.col_offset, w) *
                                  b.rows.transpose()));
    }
  }
  return err;
}

/// max |Q^T Q - I|, accumulated one column strip at a time.
inline double qtq_error(const HierQ& q, Eigen::Index strip = 96) {
  const Eigen::Index dim = 3 * q.n;
  double err = 0.0;
  Eigen::MatrixXd acc(dim, strip);
  for (Eigen::Index s0 = 0; s0 < dim; s0 += strip) {
    const Eigen::Index sw = std::min(strip, dim - s0);
    auto m = acc.leftCols(sw);
    m.noalias() = q.root_rows.transpose() * q.root_rows.middleCols(s0, sw);
    for (const auto& b : q.blocks) {
      const Eigen::Index lo = std::max<Eigen::Index>(b.col_offset, s0);
      const Eigen::Index hi = std::min<Eigen::Index>(b.col_offset + b.rows.cols(), s0 + sw);
      if (lo >= hi) continue;
      m.block(b.col_offset, lo - s0, b.rows.cols(), hi - lo).noalias() +=
          b.rows.transpose() * b.rows.middleCols(lo - b.col_offset, hi - lo);
    }
    for (Eigen::Index j = 0; j < sw; ++j) m(s0 + j, j) -= 1.0;
    err = std::max(err, max_abs(m));
  }
  return err;
}

namespace detail {

// Rank of a body's Z-matrix assuming it is not degenerate.
inline int structural_rank(int beads) { return beads == 1 ? 3 : (beads == 2 ? 5 : 6); }

}  // namespace detail

/// Divide-and-conquer baseline without the stabilization: raw Z rows in
/// the input frame, classical Gram-Schmidt on H = [Z_x Z_y; 0 Z_y] at every
/// merge. Returns Q with columns in tree order.
inline Eigen::MatrixXd naive_divide_conquer(const BodyTree& tree, const BeadModel& model,
                                            int dense_guard = 3000) {
  const Eigen::Index dim = 3 * tree.n;
  if (dim > dense_guard) {
    throw Error(ErrorCode::SizeGuard, "3n = " + std::to_string(dim) + " exceeds guard " +
                                          std::to_string(dense_guard));
  }
  if (tree.n < 2) throw Error(ErrorCode::TooSmall, "naive baseline needs at least two beads");

  auto raw_z = [&](int begin, int end) {
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(6, 3 * (end - begin));
    for (int i = begin; i < end; ++i) {
      const auto& p = model[static_cast<std::size_t>(tree.perm[static_cast<std::size_t>(i)])];
      z.block<3, 3>(0, 3 * (i - begin)).setIdentity();
      z.block<3, 3>(3, 3 * (i - begin)) = skew(p);
    }
    return z;
  };

  struct Emitted {
    int col_offset;
    Eigen::MatrixXd rows;
  };
  std::vector<Emitted> residues;
  Eigen::MatrixXd root_qz;

  for (int id : tree.post_order()) {
    const auto& nd = tree.node(id);
    if (nd.is_leaf()) continue;
    const auto& l = tree.node(nd.children[0]);
    const auto& r = tree.node(nd.children[1]);
    const Eigen::Index cols = 3 * nd.n_beads;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(12, cols);
    h.topRows(6) = raw_z(nd.begin, nd.end);
    h.bottomRightCorner(6, 3 * r.n_beads) = raw_z(r.begin, r.end);

    // Classical Gram-Schmidt: projections use the original row.
    Eigen::MatrixXd basis(12, cols);
    int kept = 0;
    int kept_first = 0;
    for (int i = 0; i < 12; ++i) {
      const Eigen::VectorXd row = h.row(i).transpose();
      Eigen::VectorXd v = row;
      if (kept > 0) v -= basis.topRows(kept).transpose() * (basis.topRows(kept) * row);
      const double norm = v.norm();
      if (norm <= 1e-10 * row.norm()) continue;
      basis.row(kept++) = v.transpose() / norm;
      if (i < 6) kept_first = kept;
    }
    const int expect_first = detail::structural_rank(nd.n_beads);
    const int expect_total = detail::structural_rank(l.n_beads) + detail::structural_rank(r.n_beads);
    if (kept_first != expect_first || kept != expect_total) {
      throw Error(ErrorCode::SingularH, "node " + std::to_string(id) + " with " +
                                            std::to_string(nd.n_beads) +
                                            " beads: H is numerically singular");
    }
    if (kept > kept_first) {
      residues.push_back({3 * nd.begin, basis.middleRows(kept_first, kept - kept_first)});
    }
    if (id == tree.root) root_qz = basis.topRows(kept_first);
  }

  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
  q.topRows(root_qz.rows()) = root_qz;
  Eigen::Index row = root_qz.rows();
  for (const auto& e : residues) {
    q.block(row, e.col_offset, e.rows.rows(), e.rows.cols()) = e.rows;
    row += e.rows.rows();
  }
  return q;
}

struct OrthogonalityRow {
  int n = 0;
  int z_rank = 0;
  std::optional<double> qqt;
  std::optional<double> qtq;
  std::optional<double> qv_dev;
  std::optional<double> qtv_dev;
  std::optional<double> roundtrip_qtq;  // |Q^T (Q v) - v|
  std::optional<double> roundtrip_qqt;  // |Q (Q^T w) - w|
};

/// All error measures for one body. Gram checks are skipped when 3n exceeds
/// the dense guard; explicit-vs-implicit checks need n >= 2.
inline OrthogonalityRow orthogonality_row(const BodyOperator& op, std::uint64_t seed,
                                          int dense_guard = kDefaultDenseGuard) {
  OrthogonalityRow row;
  const int n = op.n();
  row.n = n;
  row.z_rank = z_rank(assemble_z(op.model(), op.model().centroid()));
  const Eigen::VectorXd v = random_vector(3 * n, seed);
  const Eigen::VectorXd w = random_vector(3 * n, seed + 1);
  const Eigen::VectorXd qv = op.apply(Op::Q, v);
  const Eigen::VectorXd qtw = op.apply(Op::QT, w);
  row.roundtrip_qtq = (op.apply(Op::QT, qv) - v).cwiseAbs().maxCoeff();
  row.roundtrip_qqt = (op.apply(Op::Q, qtw) - w).cwiseAbs().maxCoeff();
  if (n < 2) return row;

  const HierQ q = op.explicit_q();
  row.qv_dev = (q.apply(v) - qv).cwiseAbs().maxCoeff();
  row.qtv_dev = (q.apply_transpose(w) - qtw).cwiseAbs().maxCoeff();
  if (3 * n <= dense_guard) {
    row.qqt = qqt_error(q);
    row.qtq = qtq_error(q);
  }
  return row;
}

inline std::vector<OrthogonalityRow> orthogonality_report(const std::vector<int>& n_values,
                                                          std::uint64_t seed,
                                                          int dense_guard = kDefaultDenseGuard) {
  std::vector<OrthogonalityRow> rows;
  for (int n : n_values) {
    const BodyOperator op(BeadModel(generate_cloud(CloudKind::Uniform, n, seed)));
    rows.push_back(orthogonality_row(op, seed + static_cast<std::uint64_t>(n), dense_guard));
  }
  return rows;
}

inline void write_report_csv(std::ostream& out, const std::vector<OrthogonalityRow>& rows) {
  auto cell = [](const std::optional<double>& x) {
    if (!x) return std::string("n/a");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", *x);
    return std::string(buf);
  };
  out << "n,qqt,qtq,qv_dev,qtv_dev,roundtrip_qtq,roundtrip_qqt\n";
  for (const auto& r : rows) {
    out << r.n << ',' << cell(r.qqt) << ',' << cell(r.qtq) << ',' << cell(r.qv_dev) << ','
        << cell(r.qtv_dev) << ',' << cell(r.roundtrip_qtq) << ',' << cell(r.roundtrip_qqt)
        << '\n';
  }
}

}  // namespace hqr

#endif  // HQR_ORACLE_HPP
