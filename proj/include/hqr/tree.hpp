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

#ifndef HQR_TREE_HPP
#define HQR_TREE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hqr/common.hpp"
#include "hqr/model.hpp"

namespace hqr {

struct Box {
  Vec3 lo;
  Vec3 hi;
};

// Ghost levels cycle through these axes: z, then y, then x.
inline constexpr std::array<int, 3> kSplitOrder = {2, 1, 0};

struct TreeNode {
  std::array<int, 2> children{-1, -1};
  int parent = -1;
  int begin = 0;  // bead range [begin, end) in tree order
  int end = 0;
  int n_beads = 0;
  Vec3 centroid = Vec3::Zero();
  Box box;
  int split_axis = -1;  // axis that separated the children; -1 for leaves
  int level = 0;        // ghost level at which the node was created

  bool is_leaf() const noexcept { return children[0] < 0; }
};

struct TreeOptions {
  // 3 ghost levels per octree level; 52 octree levels exhaust the
  // resolution of a double-precision midpoint bisection.
  int max_depth = 156;
};

/// Binary spatial tree over the beads of one body. Node ids are assigned
/// in pre-order, so every child id is larger than its parent's.
class BodyTree {
 public:
  std::vector<TreeNode> nodes;
  int root = 0;
  std::vector<int> perm;  // perm[tree position] = original bead index
  int n = 0;

  const TreeNode& node(int id) const { return nodes[static_cast<std::size_t>(id)]; }
  std::size_t node_count() const noexcept { return nodes.size(); }

  /// Children before parents, left subtree before right subtree.
  std::vector<int> post_order() const {
    std::vector<int> order;
    order.reserve(nodes.size());
    std::vector<std::pair<int, bool>> stack{{root, false}};
    while (!stack.empty()) {
      auto [id, expanded] = stack.back();
      stack.pop_back();
      const auto& nd = node(id);
      if (expanded || nd.is_leaf()) {
        order.push_back(id);
      } else {
        stack.push_back({id, true});
        stack.push_back({nd.children[1], false});
        stack.push_back({nd.children[0], false});
      }
    }
    return order;
  }

  int max_level() const {
    int d = 0;
    for (const auto& nd : nodes) d = std::max(d, nd.level);
    return d;
  }
};

namespace detail {

class TreeBuilder {
 public:
  TreeBuilder(const BeadModel& model, const TreeOptions& options)
      : model_(model), options_(options) {}

  BodyTree build() {
    const int n = static_cast<int>(model_.size());
    BodyTree tree;
    tree.n = n;
    tree.perm.resize(static_cast<std::size_t>(n));
    std::iota(tree.perm.begin(), tree.perm.end(), 0);
    tree.nodes.reserve(static_cast<std::size_t>(2 * n - 1));
    tree_ = &tree;

    const Vec3 center = 0.5 * (model_.lower() + model_.upper());
    double half = 0.5 * (model_.upper() - model_.lower()).maxCoeff();
    half = half > 0.0 ? half * (1.0 + 1e-9) : 0.5;
    const Box root_box{center.array() - half, center.array() + half};
    tree.root = make_node(0, n, root_box, 0, -1);
    tree_ = nullptr;
    return tree;
  }

 private:
  int make_node(int begin, int end, Box box, int level, int parent) {
    const int id = static_cast<int>(tree_->nodes.size());
    tree_->nodes.emplace_back();
    {
      auto& nd = tree_->nodes.back();
      nd.parent = parent;
      nd.begin = begin;
      nd.end = end;
      nd.n_beads = end - begin;
      nd.level = level;
      nd.box = box;
    }
    if (end - begin == 1) {
      tree_->nodes[static_cast<std::size_t>(id)].centroid =
          model_[static_cast<std::size_t>(tree_->perm[static_cast<std::size_t>(begin)])];
      return id;
    }

    // Bisect along the ghost axis; collapse ghost levels with an empty side.
    auto first = tree_->perm.begin() + begin;
    auto last = tree_->perm.begin() + end;
    while (true) {
      if (level >= options_.max_depth) {
        std::ostringstream msg;
        msg << "split depth exceeded " << options_.max_depth << " with " << (end - begin)
            << " beads unseparated";
        throw Error(ErrorCode::DuplicateBeads, msg.str());
      }
      const int axis = kSplitOrder[static_cast<std::size_t>(level % 3)];
      const double mid = 0.5 * (box.lo[axis] + box.hi[axis]);
      auto cut = std::stable_partition(
          first, last, [&](int i) { return model_[static_cast<std::size_t>(i)][axis] <= mid; });
      Box lower = box;
      Box upper = box;
      lower.hi[axis] = mid;
      upper.lo[axis] = mid;
      ++level;
      if (cut == first) {
        box = upper;
        continue;
      }
      if (cut == last) {
        box = lower;
        continue;
      }
      const int split = static_cast<int>(cut - tree_->perm.begin());
      const int left = make_node(begin, split, lower, level, id);
      const int right = make_node(split, end, upper, level, id);
      auto& nd = tree_->nodes[static_cast<std::size_t>(id)];
      nd.children = {left, right};
      nd.split_axis = axis;
      const auto& l = tree_->nodes[static_cast<std::size_t>(left)];
      const auto& r = tree_->nodes[static_cast<std::size_t>(right)];
      nd.centroid = (l.n_beads * l.centroid + r.n_beads * r.centroid) / nd.n_beads;
      return id;
    }
  }

  const BeadModel& model_;
  TreeOptions options_;
  BodyTree* tree_ = nullptr;
};

}  // namespace detail

/// Adaptive binary tree: octree refinement expressed as z/y/x midpoint
/// bisections, empty halves pruned, one bead per leaf.
inline BodyTree build_tree(const BeadModel& model, const TreeOptions& options = {}) {
  return detail::TreeBuilder(model, options).build();
}

/// Checks the structural invariants; returns one message per violation.
inline std::vector<std::string> validate_tree(const BodyTree& tree) {
  std::vector<std::string> issues;
  auto report = [&](int id, const std::string& what) {
    issues.push_back("node " + std::to_string(id) + ": " + what);
  };
  const auto count = static_cast<int>(tree.nodes.size());
  if (tree.n < 1) issues.push_back("tree has no beads");
  if (count != 2 * tree.n - 1) {
    issues.push_back("node count " + std::to_string(count) + " != 2n-1 = " +
                     std::to_string(2 * tree.n - 1));
  }
  if (static_cast<int>(tree.perm.size()) != tree.n) {
    issues.push_back("perm length " + std::to_string(tree.perm.size()) + " != n");
  } else {
    std::vector<char> seen(static_cast<std::size_t>(tree.n), 0);
    for (int p : tree.perm) {
      if (p < 0 || p >= tree.n || seen[static_cast<std::size_t>(p)]) {
        issues.push_back("perm is not a bijection (entry " + std::to_string(p) + ")");
        break;
      }
      seen[static_cast<std::size_t>(p)] = 1;
    }
  }
  if (tree.root < 0 || tree.root >= count) {
    issues.push_back("root id out of range");
    return issues;
  }
  const auto& root = tree.node(tree.root);
  if (root.begin != 0 || root.end != tree.n) report(tree.root, "root does not cover all beads");

  int leaves = 0;
  int expected_begin = 0;
  for (int id : tree.post_order()) {
    const auto& nd = tree.node(id);
    if (nd.n_beads != nd.end - nd.begin) report(id, "n_beads disagrees with bead range");
    if (nd.is_leaf()) {
      ++leaves;
      if (nd.n_beads != 1) report(id, "leaf holds " + std::to_string(nd.n_beads) + " beads");
      if (nd.begin != expected_begin) report(id, "leaf ranges are not contiguous");
      expected_begin = nd.end;
      continue;
    }
    if (nd.children[1] < 0) {
      report(id, "internal node with a single child");
      continue;
    }
    const auto& l = tree.node(nd.children[0]);
    const auto& r = tree.node(nd.children[1]);
    if (nd.n_beads != l.n_beads + r.n_beads) report(id, "n_beads != sum of children");
    if (l.begin != nd.begin || l.end != r.begin || r.end != nd.end) {
      report(id, "children do not partition the bead range");
    }
    if (l.parent != id || r.parent != id) report(id, "child parent link broken");
    const Vec3 c = (l.n_beads * l.centroid + r.n_beads * r.centroid) / nd.n_beads;
    const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
    if ((c - nd.centroid).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      report(id, "centroid disagrees with children");
    }
  }
  if (leaves != tree.n) issues.push_back("leaf count " + std::to_string(leaves) + " != n");
  return issues;
}

/// One line per node: id n_beads cx cy cz child0 child1.
inline void write_tree_dump(std::ostream& out, const BodyTree& tree) {
  const auto old_precision = out.precision(17);
  for (std::size_t id = 0; id < tree.nodes.size(); ++id) {
    const auto& nd = tree.nodes[id];
    out << id << ' ' << nd.n_beads << ' ' << nd.centroid.x() << ' ' << nd.centroid.y() << ' '
        << nd.centroid.z() << ' ' << nd.children[0] << ' ' << nd.children[1] << '\n';
  }
  out.precision(old_precision);
}

}  // namespace hqr

#endif  // HQR_TREE_HPP
