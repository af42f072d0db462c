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

#ifndef HQR_FACTOR_HPP
#define HQR_FACTOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <ostream>
#include <utility>
#include <vector>

#include "hqr/common.hpp"
#include "hqr/model.hpp"
#include "hqr/small_lq.hpp"
#include "hqr/tree.hpp"

namespace hqr {

enum class CaseTag { Leaf, BeadBead, RigidBead, General };

/// Compressed factorization of one tree node.
///
/// For an internal node p with children x, y the rotational rows of the
/// Z-matrix about p's centroid are written as a * B, where the rows of B are
///
///   [V 0]                             (only if x holds more than one bead)
///   [0 W]                             (only if y holds more than one bead)
///   [sqrt(ny/n) I_nx, -sqrt(nx/n) I_ny]
///
/// V, W being the children's U rows and I_m = [I ... I] / sqrt(m). With
/// a = [t22 | 0] * omega, the first three rows of omega * B are p's U rows and
/// the remaining k - 3 rows are the residue rows p contributes to Q~.
struct NodeFactor {
  CaseTag tag = CaseTag::Leaf;
  int n = 1;
  int n_x = 0;
  int n_y = 0;
  Vec3 centroid = Vec3::Zero();
  Mat3 t22 = Mat3::Zero();
  SmallMatrix omega;  // k x k, k = 3 (BeadBead), 6 (RigidBead), 9 (General)
  Mat3 r21 = Mat3::Zero();
  Mat3 s21 = Mat3::Zero();
  int residue_rows = 0;
  int residue_offset = 0;  // start of this node's residues in emission order

  bool x_multi() const noexcept { return n_x > 1; }
  bool y_multi() const noexcept { return n_y > 1; }
  Eigen::Index k() const noexcept { return omega.rows(); }
  Eigen::Index x_block() const noexcept { return 0; }
  Eigen::Index y_block() const noexcept { return x_multi() ? 3 : 0; }
  Eigen::Index shift_block() const noexcept { return k() - 3; }

  std::size_t stored_doubles() const noexcept {
    return static_cast<std::size_t>(3 + 9 + 9 + 9 + k() * k());
  }
};

inline NodeFactor factor_leaf(const Vec3& bead) {
  NodeFactor f;
  f.tag = CaseTag::Leaf;
  f.n = 1;
  f.centroid = bead;
  return f;
}

/// Skew matrix moving a child's torque reference from its own centroid to
/// the parent's: [I 0; shift I] * Z_child(child) = Z_child(parent).
inline Mat3 child_shift(const Vec3& parent_centroid, const Vec3& child_centroid) {
  return skew(child_centroid - parent_centroid);
}

/// Two single-bead children at +d and -d about their midpoint. Closed form:
/// the rotational rows are sqrt(2) skew(d) [I, -I] / sqrt(2), and
/// sqrt(2) skew(d) = t22 * [w1; w2; w3] with w1 = e_x x d / |e_x x d|,
/// w2 = +-d^ x w1 and w3 = -d^. The sign of w2 keeps the diagonal of t22
/// nonnegative; t22 always has rank two.
inline NodeFactor factor_bead_bead(const Vec3& bead_x, const Vec3& bead_y) {
  NodeFactor f;
  f.tag = CaseTag::BeadBead;
  f.n = 2;
  f.n_x = 1;
  f.n_y = 1;
  f.centroid = 0.5 * (bead_x + bead_y);
  const Vec3 d = 0.5 * (bead_x - bead_y);
  f.r21 = skew(d);
  f.s21 = skew(-d);

  const double a = d.x();
  const double b = d.y();
  const double c = d.z();
  const double len = d.norm();
  const double s = std::hypot(b, c);
  const double sqrt2 = std::sqrt(2.0);
  const Vec3 dhat = d / len;

  Vec3 w1;
  Vec3 w2;
  f.t22.setZero();
  if (s > 0.0) {
    const double tau = c < 0.0 ? -1.0 : 1.0;
    w1 = Vec3(0.0, -c / s, b / s);
    w2 = tau * dhat.cross(w1);
    f.t22(0, 0) = sqrt2 * s;
    f.t22(1, 0) = -sqrt2 * a * b / s;
    f.t22(2, 0) = -sqrt2 * a * c / s;
    f.t22(1, 1) = sqrt2 * std::abs(c) * len / s;
    f.t22(2, 1) = -tau * sqrt2 * b * len / s;
  } else {
    // d along the x axis.
    w1 = Vec3(0.0, -1.0, 0.0);
    w2 = dhat.cross(w1);
    f.t22(2, 0) = -sqrt2 * a;
    f.t22(1, 1) = sqrt2 * std::abs(a);
  }
  f.omega.resize(3, 3);
  f.omega.row(0) = w1.transpose();
  f.omega.row(1) = w2.transpose();
  f.omega.row(2) = -dhat.transpose();
  f.residue_rows = 0;
  flops::add(40);
  return f;
}

namespace detail {

inline NodeFactor factor_multi(const NodeFactor& x, const NodeFactor& y) {
  NodeFactor f;
  f.n_x = x.n;
  f.n_y = y.n;
  f.n = x.n + y.n;
  const double n = f.n;
  const double nx = f.n_x;
  const double ny = f.n_y;
  const Vec3 diff = x.centroid - y.centroid;
  f.centroid = (nx * x.centroid + ny * y.centroid) / n;
  f.r21 = skew((ny / n) * diff);
  f.s21 = skew((-nx / n) * diff);

  const Eigen::Index k = 3 * (1 + (f.x_multi() ? 1 : 0) + (f.y_multi() ? 1 : 0));
  SmallMatrix a(3, k);
  Eigen::Index col = 0;
  if (f.x_multi()) {
    a.middleCols(col, 3) = x.t22;
    col += 3;
  }
  if (f.y_multi()) {
    a.middleCols(col, 3) = y.t22;
    col += 3;
  }
  a.middleCols(col, 3) = std::sqrt(nx * n / ny) * f.r21;
  flops::add(30);

  SmallLQ lq = small_lq(a);
  f.t22 = lq.t;
  f.omega = std::move(lq.omega);
  f.tag = (f.x_multi() && f.y_multi()) ? CaseTag::General : CaseTag::RigidBead;
  f.residue_rows = static_cast<int>(k - 3);
  return f;
}

}  // namespace detail

/// One child is a single bead; the residue has three rows.
inline NodeFactor factor_rigid_bead(const NodeFactor& x, const NodeFactor& y) {
  if ((x.n > 1) == (y.n > 1)) {
    throw Error(ErrorCode::ShapeMismatch, "factor_rigid_bead needs exactly one leaf child");
  }
  return detail::factor_multi(x, y);
}

/// Both children hold several beads; 3 x 9 LQ, six residue rows.
inline NodeFactor factor_general(const NodeFactor& x, const NodeFactor& y) {
  if (x.n < 2 || y.n < 2) {
    throw Error(ErrorCode::ShapeMismatch, "factor_general needs two multi-bead children");
  }
  return detail::factor_multi(x, y);
}

inline NodeFactor factor_pair(const NodeFactor& x, const NodeFactor& y) {
  if (x.n == 1 && y.n == 1) return factor_bead_bead(x.centroid, y.centroid);
  return detail::factor_multi(x, y);
}

/// Per-node factors, indexed by tree node id.
struct FactorTable {
  std::vector<NodeFactor> nodes;
  int total_residue_rows = 0;

  const NodeFactor& operator[](int id) const { return nodes[static_cast<std::size_t>(id)]; }

  std::size_t stored_doubles() const {
    std::size_t total = 0;
    for (const auto& f : nodes) total += f.stored_doubles();
    return total;
  }
};

/// Upward reduction over the tree filling every node's factor. Residue
/// offsets follow post-order emission.
inline FactorTable factor_all(const BodyTree& tree, const BeadModel& model) {
  FactorTable table;
  table.nodes.resize(tree.node_count());
  int offset = 0;
  for (int id : tree.post_order()) {
    const auto& nd = tree.node(id);
    NodeFactor f;
    if (nd.is_leaf()) {
      f = factor_leaf(model[static_cast<std::size_t>(tree.perm[static_cast<std::size_t>(nd.begin)])]);
    } else {
      f = factor_pair(table[nd.children[0]], table[nd.children[1]]);
    }
    f.residue_offset = offset;
    offset += f.residue_rows;
    table.nodes[static_cast<std::size_t>(id)] = std::move(f);
  }
  table.total_residue_rows = offset;
  return table;
}

/// Dense U and residue rows of one node over its 3n tree-ordered columns.
struct NodeRows {
  Eigen::MatrixXd u;
  Eigen::MatrixXd residue;
};

/// Expands omega * B for an internal node. u_x / u_y are the children's U
/// rows (ignored for single-bead children).
inline NodeRows expand_rows(const NodeFactor& f, const Eigen::MatrixXd& u_x,
                            const Eigen::MatrixXd& u_y) {
  const Eigen::Index k = f.k();
  const Eigen::Index cols_x = 3 * f.n_x;
  const Eigen::Index cols_y = 3 * f.n_y;
  const double n = f.n;
  const double nx = f.n_x;
  const double ny = f.n_y;
  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(k, cols_x + cols_y);

  if (f.x_multi()) rows.leftCols(cols_x).noalias() = f.omega.middleCols(f.x_block(), 3) * u_x;
  if (f.y_multi()) rows.rightCols(cols_y).noalias() = f.omega.middleCols(f.y_block(), 3) * u_y;
  const Eigen::MatrixXd shift_x = f.omega.middleCols(f.shift_block(), 3) * (std::sqrt(ny / n) / std::sqrt(nx));
  const Eigen::MatrixXd shift_y = f.omega.middleCols(f.shift_block(), 3) * (-std::sqrt(nx / n) / std::sqrt(ny));
  for (int j = 0; j < f.n_x; ++j) rows.middleCols(3 * j, 3) += shift_x;
  for (int j = 0; j < f.n_y; ++j) rows.middleCols(cols_x + 3 * j, 3) += shift_y;
  flops::add(static_cast<std::uint64_t>(k * (cols_x + cols_y) * (f.x_multi() || f.y_multi() ? 7 : 1)));

  NodeRows out;
  out.u = rows.topRows(3);
  out.residue = rows.bottomRows(k - 3);
  return out;
}

/// Residue rows of one node placed at a tree-order column offset.
struct ResidueBlock {
  int node_id = -1;
  int col_offset = 0;  // in scalar columns, i.e. 3 * first bead position
  int parent_block = -1;  // nearest ancestor block, -1 if none
  Eigen::MatrixXd rows;
};

/// Explicit hierarchical Q = [I_np; U_root; residue blocks in emission order].
/// Columns are in tree bead order; perm maps them back to input order.
struct HierQ {
  int n = 0;
  Eigen::MatrixXd root_rows;  // 6 x 3n
  std::vector<ResidueBlock> blocks;
  std::vector<int> perm;
  std::size_t peak_doubles = 0;

  Eigen::Index rows() const {
    Eigen::Index r = root_rows.rows();
    for (const auto& b : blocks) r += b.rows.rows();
    return r;
  }

  Eigen::VectorXd to_tree_order(const Eigen::VectorXd& v) const {
    Eigen::VectorXd t(v.size());
    for (int i = 0; i < n; ++i) t.segment<3>(3 * i) = v.segment<3>(3 * perm[static_cast<std::size_t>(i)]);
    return t;
  }

  Eigen::VectorXd to_original_order(const Eigen::VectorXd& t) const {
    Eigen::VectorXd v(t.size());
    for (int i = 0; i < n; ++i) v.segment<3>(3 * perm[static_cast<std::size_t>(i)]) = t.segment<3>(3 * i);
    return v;
  }

  /// Q * v, v in original bead order.
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    if (v.size() != 3 * n) throw Error(ErrorCode::LengthMismatch, "HierQ::apply");
    const Eigen::VectorXd t = to_tree_order(v);
    Eigen::VectorXd out(3 * n);
    out.head(6).noalias() = root_rows * t;
    Eigen::Index row = 6;
    for (const auto& b : blocks) {
      const auto r = b.rows.rows();
      out.segment(row, r).noalias() = b.rows * t.segment(b.col_offset, b.rows.cols());
      row += r;
    }
    return out;
  }

  /// Q^T * w, result in original bead order.
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& w) const {
    if (w.size() != 3 * n) throw Error(ErrorCode::LengthMismatch, "HierQ::apply_transpose");
    Eigen::VectorXd t = root_rows.transpose() * w.head(6);
    Eigen::Index row = 6;
    for (const auto& b : blocks) {
      const auto r = b.rows.rows();
      t.segment(b.col_offset, b.rows.cols()).noalias() += b.rows.transpose() * w.segment(row, r);
      row += r;
    }
    return to_original_order(t);
  }
};

/// Data handed to a generation observer at every internal node.
struct NodeVisit {
  int node_id;
  const NodeFactor& factor;
  const Eigen::MatrixXd& u_x;
  const Eigen::MatrixXd& u_y;
  const NodeRows& rows;
};

using GenerationObserver = std::function<void(const NodeVisit&)>;

/// Explicit generation of Q in O(n log n). Each node's U is kept only
/// until its parent has consumed it.
inline HierQ generate_explicit_q(const BodyTree& tree, const FactorTable& factors,
                                 const GenerationObserver& observer = {}) {
  if (tree.n < 2) throw Error(ErrorCode::TooSmall, "explicit Q needs at least two beads");
  HierQ q;
  q.n = tree.n;
  q.perm = tree.perm;

  std::vector<Eigen::MatrixXd> u_store(tree.node_count());
  std::vector<int> block_of(tree.node_count(), -1);
  std::size_t live = factors.stored_doubles();
  std::size_t peak = live;
  const Eigen::MatrixXd empty(0, 3);

  for (int id : tree.post_order()) {
    const auto& nd = tree.node(id);
    if (nd.is_leaf()) continue;
    const auto& f = factors[id];
    const auto cx = static_cast<std::size_t>(nd.children[0]);
    const auto cy = static_cast<std::size_t>(nd.children[1]);
    const auto& u_x = f.x_multi() ? u_store[cx] : empty;
    const auto& u_y = f.y_multi() ? u_store[cy] : empty;
    NodeRows rows = expand_rows(f, u_x, u_y);
    live += static_cast<std::size_t>(rows.u.size() + rows.residue.size());
    peak = std::max(peak, live);
    if (observer) observer(NodeVisit{id, f, u_x, u_y, rows});

    live -= static_cast<std::size_t>(u_store[cx].size() + u_store[cy].size());
    u_store[cx] = Eigen::MatrixXd();
    u_store[cy] = Eigen::MatrixXd();
    if (rows.residue.rows() > 0) {
      block_of[static_cast<std::size_t>(id)] = static_cast<int>(q.blocks.size());
      q.blocks.push_back(ResidueBlock{id, 3 * nd.begin, -1, std::move(rows.residue)});
    }
    u_store[static_cast<std::size_t>(id)] = std::move(rows.u);
  }

  // Nearest ancestor carrying residue rows, for structured products.
  for (auto& b : q.blocks) {
    int p = tree.node(b.node_id).parent;
    while (p >= 0 && block_of[static_cast<std::size_t>(p)] < 0) p = tree.node(p).parent;
    b.parent_block = p >= 0 ? block_of[static_cast<std::size_t>(p)] : -1;
  }

  const Eigen::Index cols = 3 * tree.n;
  q.root_rows.resize(6, cols);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(tree.n));
  for (int i = 0; i < tree.n; ++i) {
    q.root_rows.block<3, 3>(0, 3 * i) = inv_sqrt_n * Mat3::Identity();
  }
  q.root_rows.bottomRows(3) = u_store[static_cast<std::size_t>(tree.root)];
  q.peak_doubles = peak + static_cast<std::size_t>(3 * cols);
  return q;
}

enum class ColumnOrder { Tree, Original };

/// Dense 3n x 3n Q in emission row order.
inline Eigen::MatrixXd materialize_dense(const HierQ& q, ColumnOrder order = ColumnOrder::Tree,
                                         int dense_guard = kDefaultDenseGuard) {
  const Eigen::Index dim = 3 * q.n;
  if (dim > dense_guard) {
    throw Error(ErrorCode::SizeGuard, "3n = " + std::to_string(dim) + " exceeds dense guard " +
                                          std::to_string(dense_guard));
  }
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(dim, dim);
  dense.topRows(6) = q.root_rows;
  Eigen::Index row = 6;
  for (const auto& b : q.blocks) {
    dense.block(row, b.col_offset, b.rows.rows(), b.rows.cols()) = b.rows;
    row += b.rows.rows();
  }
  if (order == ColumnOrder::Tree) return dense;
  Eigen::MatrixXd out(dim, dim);
  for (int i = 0; i < q.n; ++i) {
    out.middleCols(3 * q.perm[static_cast<std::size_t>(i)], 3) = dense.middleCols(3 * i, 3);
  }
  return out;
}

/// Text dump: "n rows", the six root rows, then per block
/// "node_id offset rows" followed by its rows.
inline void write_hierq(std::ostream& out, const HierQ& q) {
  const auto old_precision = out.precision(17);
  auto write_rows = [&](const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        if (c > 0) out << ' ';
        out << m(r, c);
      }
      out << '\n';
    }
  };
  out << q.n << ' ' << q.rows() << '\n';
  write_rows(q.root_rows);
  for (const auto& b : q.blocks) {
    out << b.node_id << ' ' << b.col_offset << ' ' << b.rows.rows() << '\n';
    write_rows(b.rows);
  }
  out.precision(old_precision);
}

}  // namespace hqr

#endif  // HQR_FACTOR_HPP
