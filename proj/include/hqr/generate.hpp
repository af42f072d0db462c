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

#ifndef HQR_GENERATE_HPP
#define HQR_GENERATE_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "hqr/common.hpp"

namespace hqr {

enum class CloudKind { Uniform, Shell, Line, Grid };

inline std::optional<CloudKind> parse_cloud_kind(std::string_view name) {
  if (name == "uniform") return CloudKind::Uniform;
  if (name == "shell") return CloudKind::Shell;
  if (name == "line") return CloudKind::Line;
  if (name == "grid") return CloudKind::Grid;
  return std::nullopt;
}

namespace detail {

inline Vec3 random_direction(std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec3 d;
  do {
    d = Vec3(normal(rng), normal(rng), normal(rng));
  } while (d.norm() < 1e-6);
  return d.normalized();
}

}  // namespace detail

/// Deterministic bead clouds:
///   uniform - unit cube
///   shell   - unit sphere surface
///   line    - equispaced points on a random segment of length 1
///   grid    - first n points of a k^3 lattice in the unit cube
inline std::vector<Vec3> generate_cloud(CloudKind kind, int n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::BadArgs, "cloud size must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vec3> beads;
  beads.reserve(static_cast<std::size_t>(n));
  switch (kind) {
    case CloudKind::Uniform:
      for (int i = 0; i < n; ++i) {
        const double x = unit(rng);
        const double y = unit(rng);
        const double z = unit(rng);
        beads.emplace_back(x, y, z);
      }
      break;
    case CloudKind::Shell:
      for (int i = 0; i < n; ++i) beads.push_back(detail::random_direction(rng));
      break;
    case CloudKind::Line: {
      const Vec3 start(unit(rng), unit(rng), unit(rng));
      const Vec3 dir = detail::random_direction(rng);
      for (int i = 0; i < n; ++i) {
        const double t = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
        beads.push_back(start + t * dir);
      }
      break;
    }
    case CloudKind::Grid: {
      int side = 1;
      while (side * side * side < n) ++side;
      for (int i = 0; i < n; ++i) {
        const int ix = i % side;
        const int iy = (i / side) % side;
        const int iz = i / (side * side);
        beads.emplace_back((ix + 0.5) / side, (iy + 0.5) / side, (iz + 0.5) / side);
      }
      break;
    }
  }
  return beads;
}

/// Adds independent uniform noise in [-amplitude, amplitude] per coordinate.
inline std::vector<Vec3> jitter(std::vector<Vec3> beads, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-amplitude, amplitude);
  for (auto& p : beads) {
    const double dx = noise(rng);
    const double dy = noise(rng);
    const double dz = noise(rng);
    p += Vec3(dx, dy, dz);
  }
  return beads;
}

/// Uniform entries in [-1, 1].
inline Eigen::VectorXd random_vector(Eigen::Index size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = dist(rng);
  return v;
}

}  // namespace hqr

#endif  // HQR_GENERATE_HPP
