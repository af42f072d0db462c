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

#ifndef HQR_MATFREE_HPP
#define HQR_MATFREE_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hqr/common.hpp"
#include "hqr/factor.hpp"
#include "hqr/model.hpp"
#include "hqr/tree.hpp"

namespace hqr {

// Upward pass state: Q_Z * f for a subtree ([f; 0] at a leaf).
using InfoSet = Vec6;
// Downward pass state: generalized translational/rotational coefficients.
using RVSet = Vec6;

inline InfoSet leaf_infoset(const Vec3& f) {
  InfoSet m;
  m << f, Vec3::Zero();
  return m;
}

struct MergeResult {
  InfoSet m;
  SmallVector res;  // factor.residue_rows entries
};

/// Constant-work combination of the children's Info-sets into the parent's
/// Info-set and residue coefficients.
inline MergeResult merge_infosets(const NodeFactor& f, const InfoSet& m_x, const InfoSet& m_y) {
  const double n = f.n;
  const double ax = std::sqrt(f.n_x / n);
  const double ay = std::sqrt(f.n_y / n);
  const Eigen::Index k = f.k();

  SmallVector g(k);
  if (f.x_multi()) g.segment<3>(f.x_block()) = m_x.tail<3>();
  if (f.y_multi()) g.segment<3>(f.y_block()) = m_y.tail<3>();
  g.segment<3>(f.shift_block()) = ay * m_x.head<3>() - ax * m_y.head<3>();
  const SmallVector h = f.omega * g;

  MergeResult out;
  out.m.head<3>() = ax * m_x.head<3>() + ay * m_y.head<3>();
  out.m.tail<3>() = h.head<3>();
  out.res = h.tail(k - 3);
  flops::add(static_cast<std::uint64_t>(2 * k * k + 18));
  return out;
}

struct SplitResult {
  RVSet l_x;
  RVSet l_y;
};

/// Transpose of merge_infosets: distributes the parent's RV-set and residue
/// coefficients to the children.
inline SplitResult split_rvset(const NodeFactor& f, const RVSet& l_p,
                               const Eigen::Ref<const Eigen::VectorXd>& res) {
  if (res.size() != f.residue_rows) {
    throw Error(ErrorCode::LengthMismatch, "split_rvset: residue length " +
                                               std::to_string(res.size()) + " != " +
                                               std::to_string(f.residue_rows));
  }
  const double n = f.n;
  const double ax = std::sqrt(f.n_x / n);
  const double ay = std::sqrt(f.n_y / n);
  const Eigen::Index k = f.k();

  SmallVector z(k);
  z.head<3>() = l_p.tail<3>();
  z.tail(k - 3) = res;
  const SmallVector h = f.omega.transpose() * z;
  const Vec3 shift = h.segment<3>(f.shift_block());

  SplitResult out;
  out.l_x.head<3>() = ax * l_p.head<3>() + ay * shift;
  out.l_y.head<3>() = ay * l_p.head<3>() - ax * shift;
  out.l_x.tail<3>() = f.x_multi() ? Vec3(h.segment<3>(f.x_block())) : Vec3::Zero();
  out.l_y.tail<3>() = f.y_multi() ? Vec3(h.segment<3>(f.y_block())) : Vec3::Zero();
  flops::add(static_cast<std::uint64_t>(2 * k * k + 18));
  return out;
}

/// Q * v in O(n). v is in original bead order; the result is laid out as
/// [root Info-set (6); residue coefficients in post-order emission].
inline Eigen::VectorXd upward_apply(const BodyTree& tree, const FactorTable& factors,
                                    const Eigen::VectorXd& v) {
  const Eigen::Index dim = 3 * tree.n;
  if (v.size() != dim) {
    throw Error(ErrorCode::LengthMismatch, "upward_apply: got " + std::to_string(v.size()) +
                                               ", expected " + std::to_string(dim));
  }
  if (tree.n == 1) return v;

  Eigen::VectorXd out(dim);
  std::vector<InfoSet> info(tree.node_count());
  // Children ids exceed their parent's, so a reverse sweep is a valid post-order.
  for (int id = static_cast<int>(tree.node_count()) - 1; id >= 0; --id) {
    const auto& nd = tree.node(id);
    const auto slot = static_cast<std::size_t>(id);
    if (nd.is_leaf()) {
      const int bead = tree.perm[static_cast<std::size_t>(nd.begin)];
      info[slot] = leaf_infoset(v.segment<3>(3 * bead));
      continue;
    }
    const auto& f = factors[id];
    MergeResult merged = merge_infosets(f, info[static_cast<std::size_t>(nd.children[0])],
                                        info[static_cast<std::size_t>(nd.children[1])]);
    info[slot] = merged.m;
    if (f.residue_rows > 0) out.segment(6 + f.residue_offset, f.residue_rows) = merged.res;
  }
  out.head<6>() = info[static_cast<std::size_t>(tree.root)];
  return out;
}

namespace detail {

inline Eigen::VectorXd downward(const BodyTree& tree, const FactorTable& factors,
                                const RVSet& root_rvset, const Eigen::VectorXd& w) {
  Eigen::VectorXd out(3 * tree.n);
  std::vector<RVSet> rv(tree.node_count());
  rv[static_cast<std::size_t>(tree.root)] = root_rvset;
  // Pre-order ids: a parent is always visited before its children.
  for (int id = 0; id < static_cast<int>(tree.node_count()); ++id) {
    const auto& nd = tree.node(id);
    const auto& l = rv[static_cast<std::size_t>(id)];
    if (nd.is_leaf()) {
      const int bead = tree.perm[static_cast<std::size_t>(nd.begin)];
      out.segment<3>(3 * bead) = l.head<3>();
      continue;
    }
    const auto& f = factors[id];
    SplitResult split = split_rvset(f, l, w.segment(6 + f.residue_offset, f.residue_rows));
    rv[static_cast<std::size_t>(nd.children[0])] = split.l_x;
    rv[static_cast<std::size_t>(nd.children[1])] = split.l_y;
  }
  return out;
}

}  // namespace detail

/// Q^T * w in O(n); w uses the upward_apply layout, result is in original
/// bead order.
inline Eigen::VectorXd downward_apply(const BodyTree& tree, const FactorTable& factors,
                                      const Eigen::VectorXd& w) {
  const Eigen::Index dim = 3 * tree.n;
  if (w.size() != dim) {
    throw Error(ErrorCode::LengthMismatch, "downward_apply: got " + std::to_string(w.size()) +
                                               ", expected " + std::to_string(dim));
  }
  if (tree.n == 1) return w;
  return detail::downward(tree, factors, w.head<6>(), w);
}

/// Q~ * v: the residue part of Q * v, length 3n - 6.
inline Eigen::VectorXd qtilde_apply(const BodyTree& tree, const FactorTable& factors,
                                    const Eigen::VectorXd& v) {
  if (tree.n < 2) throw Error(ErrorCode::BodyTooSmall, "Q~ needs at least two beads");
  return upward_apply(tree, factors, v).tail(3 * tree.n - 6);
}

/// Q~^T * g: downward pass with a zero root RV-set.
inline Eigen::VectorXd qtilde_transpose_apply(const BodyTree& tree, const FactorTable& factors,
                                              const Eigen::VectorXd& g) {
  if (tree.n < 2) throw Error(ErrorCode::BodyTooSmall, "Q~ needs at least two beads");
  const Eigen::Index len = 3 * tree.n - 6;
  if (g.size() != len) {
    throw Error(ErrorCode::LengthMismatch, "qtilde_transpose_apply: got " +
                                               std::to_string(g.size()) + ", expected " +
                                               std::to_string(len));
  }
  Eigen::VectorXd w(3 * tree.n);
  w.head<6>().setZero();
  w.tail(len) = g;
  return detail::downward(tree, factors, RVSet::Zero(), w);
}

enum class Op { Q, QT, QTilde, QTildeT };

/// Tree and factor table of one body, built once and shared read-only.
class BodyOperator {
 public:
  explicit BodyOperator(BeadModel model, const TreeOptions& options = {})
      : model_(std::move(model)),
        tree_(build_tree(model_, options)),
        factors_(factor_all(tree_, model_)) {}

  const BeadModel& model() const noexcept { return model_; }
  const BodyTree& tree() const noexcept { return tree_; }
  const FactorTable& factors() const noexcept { return factors_; }
  int n() const noexcept { return tree_.n; }

  Eigen::Index input_size(Op op) const {
    return op == Op::QTildeT ? 3 * tree_.n - 6 : 3 * tree_.n;
  }
  Eigen::Index output_size(Op op) const {
    return op == Op::QTilde ? 3 * tree_.n - 6 : 3 * tree_.n;
  }

  Eigen::VectorXd apply(Op op, const Eigen::VectorXd& v) const {
    switch (op) {
      case Op::Q: return upward_apply(tree_, factors_, v);
      case Op::QT: return downward_apply(tree_, factors_, v);
      case Op::QTilde: return qtilde_apply(tree_, factors_, v);
      case Op::QTildeT: return qtilde_transpose_apply(tree_, factors_, v);
    }
    return {};
  }

  HierQ explicit_q() const { return generate_explicit_q(tree_, factors_); }

 private:
  BeadModel model_;
  BodyTree tree_;
  FactorTable factors_;
};

/// Block-diagonal operator over several bodies.
class MultiBodyOperator {
 public:
  explicit MultiBodyOperator(const MultiBodyModel& models, const TreeOptions& options = {}) {
    bodies_.reserve(models.bodies.size());
    for (const auto& b : models.bodies) bodies_.emplace_back(b, options);
  }

  const std::vector<BodyOperator>& bodies() const noexcept { return bodies_; }

  Eigen::Index input_size(Op op) const {
    Eigen::Index total = 0;
    for (const auto& b : bodies_) total += b.input_size(op);
    return total;
  }

  Eigen::Index output_size(Op op) const {
    Eigen::Index total = 0;
    for (const auto& b : bodies_) total += b.output_size(op);
    return total;
  }

  Eigen::VectorXd apply(Op op, const Eigen::VectorXd& v) const {
    if (op == Op::QTilde || op == Op::QTildeT) {
      for (std::size_t j = 0; j < bodies_.size(); ++j) {
        if (bodies_[j].n() < 2) {
          throw Error(ErrorCode::BodyTooSmall, "body " + std::to_string(j) + " has a single bead");
        }
      }
    }
    if (v.size() != input_size(op)) {
      throw Error(ErrorCode::LengthMismatch, "multibody apply: got " + std::to_string(v.size()) +
                                                 ", expected " + std::to_string(input_size(op)));
    }
    Eigen::VectorXd out(output_size(op));
    Eigen::Index in_at = 0;
    Eigen::Index out_at = 0;
    for (const auto& b : bodies_) {
      const Eigen::Index len_in = b.input_size(op);
      const Eigen::Index len_out = b.output_size(op);
      out.segment(out_at, len_out) = b.apply(op, v.segment(in_at, len_in));
      in_at += len_in;
      out_at += len_out;
    }
    return out;
  }

 private:
  std::vector<BodyOperator> bodies_;
};

inline Eigen::VectorXd multibody_apply(const MultiBodyOperator& models, Op op,
                                       const Eigen::VectorXd& v) {
  return models.apply(op, v);
}

}  // namespace hqr

#endif  // HQR_MATFREE_HPP
