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

#ifndef HQR_MODEL_HPP
#define HQR_MODEL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hqr/common.hpp"

namespace hqr {

/// Cross-product matrix: skew(r) * f == r.cross(f).
inline Mat3 skew(const Vec3& r) {
  Mat3 a;
  a << 0.0, -r.z(), r.y(),
       r.z(), 0.0, -r.x(),
       -r.y(), r.x(), 0.0;
  return a;
}

/// Relative separation below which two beads are treated as coincident.
inline constexpr double kDuplicateTolerance = 1e-12;

/// Positions of the beads of one rigid body. Beads carry unit weight;
/// radii are not modelled.
class BeadModel {
 public:
  explicit BeadModel(std::vector<Vec3> positions, int body_id = 0)
      : positions_(std::move(positions)), body_id_(body_id) {
    if (positions_.empty()) {
      throw Error(ErrorCode::InvalidModel, "a body needs at least one bead");
    }
    for (const auto& p : positions_) {
      if (!p.allFinite()) {
        throw Error(ErrorCode::InvalidModel, "non-finite bead coordinate");
      }
    }
    Vec3 sum = Vec3::Zero();
    lo_ = hi_ = positions_.front();
    for (const auto& p : positions_) {
      sum += p;
      lo_ = lo_.cwiseMin(p);
      hi_ = hi_.cwiseMax(p);
    }
    centroid_ = sum / static_cast<double>(positions_.size());
    check_duplicates();
  }

  std::size_t size() const noexcept { return positions_.size(); }
  int body_id() const noexcept { return body_id_; }
  const std::vector<Vec3>& positions() const noexcept { return positions_; }
  const Vec3& operator[](std::size_t i) const { return positions_[i]; }
  const Vec3& centroid() const noexcept { return centroid_; }
  const Vec3& lower() const noexcept { return lo_; }
  const Vec3& upper() const noexcept { return hi_; }

  double bounding_diagonal() const { return (hi_ - lo_).norm(); }

  /// Largest absolute coordinate; the natural scale for absolute tolerances.
  double coordinate_scale() const {
    return std::max(lo_.cwiseAbs().maxCoeff(), hi_.cwiseAbs().maxCoeff());
  }

 private:
  // Hash grid with cell size equal to the tolerance: a coincident pair
  // always lands in the same or a neighbouring cell.
  void check_duplicates() const {
    const std::size_t n = positions_.size();
    if (n < 2) return;
    const double diag = bounding_diagonal();
    if (diag == 0.0) {
      throw Error(ErrorCode::DuplicateBeads, "all beads coincide");
    }
    const double tol = kDuplicateTolerance * diag;
    using Key = std::array<std::int64_t, 3>;
    struct KeyHash {
      std::size_t operator()(const Key& k) const noexcept {
        std::uint64_t h = 1469598103934665603ull;
        for (auto v : k) {
          h ^= static_cast<std::uint64_t>(v);
          h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
      }
    };
    auto key_of = [&](const Vec3& p) {
      Key k;
      for (int d = 0; d < 3; ++d) {
        k[d] = static_cast<std::int64_t>(std::floor((p[d] - lo_[d]) / tol));
      }
      return k;
    };
    std::unordered_map<Key, std::vector<std::size_t>, KeyHash> grid;
    grid.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Key k = key_of(positions_[i]);
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dz = -1; dz <= 1; ++dz) {
            auto it = grid.find(Key{k[0] + dx, k[1] + dy, k[2] + dz});
            if (it == grid.end()) continue;
            for (std::size_t j : it->second) {
              if ((positions_[i] - positions_[j]).norm() < tol) {
                std::ostringstream msg;
                msg << "beads " << j << " and " << i << " closer than " << tol;
                throw Error(ErrorCode::DuplicateBeads, msg.str());
              }
            }
          }
        }
      }
      grid[k].push_back(i);
    }
  }

  std::vector<Vec3> positions_;
  int body_id_ = 0;
  Vec3 centroid_;
  Vec3 lo_;
  Vec3 hi_;
};

inline Vec3 centroid(const BeadModel& model) { return model.centroid(); }

/// Dense 6 x 3n force/torque map of one body about `origin`.
struct ZMatrix {
  Eigen::MatrixXd entries;
  Vec3 origin;
};

inline ZMatrix assemble_z(const BeadModel& model, const Vec3& origin) {
  const auto n = static_cast<Eigen::Index>(model.size());
  ZMatrix z{Eigen::MatrixXd::Zero(6, 3 * n), origin};
  for (Eigen::Index k = 0; k < n; ++k) {
    z.entries.block<3, 3>(0, 3 * k).setIdentity();
    z.entries.block<3, 3>(3, 3 * k) = skew(model[static_cast<std::size_t>(k)] - origin);
  }
  return z;
}

/// Several rigid bodies; global vectors concatenate per-body 3n_j blocks.
struct MultiBodyModel {
  std::vector<BeadModel> bodies;

  std::size_t total_beads() const {
    std::size_t n = 0;
    for (const auto& b : bodies) n += b.size();
    return n;
  }

  /// Bead-count prefix sums, size bodies.size() + 1.
  std::vector<std::size_t> bead_offsets() const {
    std::vector<std::size_t> off(bodies.size() + 1, 0);
    for (std::size_t j = 0; j < bodies.size(); ++j) off[j + 1] = off[j] + bodies[j].size();
    return off;
  }
};

// Bead file: three coordinates per line, '#' comments, bodies separated by "---".
inline MultiBodyModel read_beads(std::istream& in) {
  MultiBodyModel multi;
  std::vector<Vec3> current;
  std::string line;
  int line_no = 0;
  auto flush = [&]() {
    if (!current.empty()) {
      const int id = static_cast<int>(multi.bodies.size());
      multi.bodies.emplace_back(std::move(current), id);
      current.clear();
    }
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    if (line.substr(first, last - first + 1) == "---") {
      flush();
      continue;
    }
    std::istringstream fields(line);
    Vec3 p;
    std::string extra;
    if (!(fields >> p.x() >> p.y() >> p.z()) || (fields >> extra)) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": expected three coordinates");
    }
    current.push_back(p);
  }
  flush();
  if (multi.bodies.empty()) {
    throw Error(ErrorCode::ParseError, "bead file contains no beads");
  }
  return multi;
}

inline void write_beads(std::ostream& out, const MultiBodyModel& multi) {
  const auto old_precision = out.precision(17);
  for (std::size_t j = 0; j < multi.bodies.size(); ++j) {
    if (j > 0) out << "---\n";
    for (const auto& p : multi.bodies[j].positions()) {
      out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace hqr

#endif  // HQR_MODEL_HPP
