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

#ifndef HQR_BENCH_HPP
#define HQR_BENCH_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hqr/common.hpp"
#include "hqr/factor.hpp"
#include "hqr/generate.hpp"
#include "hqr/matfree.hpp"
#include "hqr/model.hpp"
#include "hqr/tree.hpp"

namespace hqr {

// Stored doubles per tree node: centroid and box.
inline constexpr std::size_t kTreeNodeDoubles = 9;

/// Doubles held live by the upward pass: tree, factors, Info-sets, in/out vectors.
inline std::size_t upward_storage_doubles(const BodyTree& tree, const FactorTable& factors) {
  return kTreeNodeDoubles * tree.node_count() + factors.stored_doubles() +
         6 * tree.node_count() + 6 * static_cast<std::size_t>(tree.n);
}

/// Doubles held live by the downward pass: factors, RV-sets, in/out vectors.
inline std::size_t downward_storage_doubles(const BodyTree& tree, const FactorTable& factors) {
  return factors.stored_doubles() + 6 * tree.node_count() + 6 * static_cast<std::size_t>(tree.n);
}

struct BenchRecord {
  int n = 0;
  double explicit_s = 0.0;
  double upward_s = 0.0;
  double downward_s = 0.0;
  std::size_t explicit_bytes = 0;
  std::size_t upward_bytes = 0;
  std::size_t downward_bytes = 0;
  std::uint64_t explicit_flops = 0;
  std::uint64_t upward_flops = 0;
  std::uint64_t downward_flops = 0;
};

/// Times are minima over `repeats` runs. "upward" includes computing the
/// factor table, which the downward pass reuses.
inline BenchRecord bench_one(int n, int repeats, std::uint64_t seed) {
  using clock = std::chrono::steady_clock;
  const BeadModel model(generate_cloud(CloudKind::Uniform, n, seed));
  const BodyTree tree = build_tree(model);
  const Eigen::VectorXd v = random_vector(3 * n, seed + 1);

  BenchRecord rec;
  rec.n = n;
  rec.explicit_s = rec.upward_s = rec.downward_s = std::numeric_limits<double>::infinity();
  auto seconds = [](clock::duration d) { return std::chrono::duration<double>(d).count(); };

  for (int r = 0; r < std::max(1, repeats); ++r) {
    flops::reset();
    auto t0 = clock::now();
    const FactorTable f_explicit = factor_all(tree, model);
    const HierQ q = generate_explicit_q(tree, f_explicit);
    rec.explicit_s = std::min(rec.explicit_s, seconds(clock::now() - t0));
    rec.explicit_flops = flops::read();
    rec.explicit_bytes = 8 * (q.peak_doubles + kTreeNodeDoubles * tree.node_count());

    flops::reset();
    t0 = clock::now();
    const FactorTable factors = factor_all(tree, model);
    const Eigen::VectorXd w = upward_apply(tree, factors, v);
    rec.upward_s = std::min(rec.upward_s, seconds(clock::now() - t0));
    rec.upward_flops = flops::read();
    rec.upward_bytes = 8 * upward_storage_doubles(tree, factors);

    flops::reset();
    t0 = clock::now();
    const Eigen::VectorXd back = downward_apply(tree, factors, w);
    rec.downward_s = std::min(rec.downward_s, seconds(clock::now() - t0));
    rec.downward_flops = flops::read();
    rec.downward_bytes = 8 * downward_storage_doubles(tree, factors);
  }
  return rec;
}

inline std::vector<BenchRecord> run_bench(const std::vector<int>& n_values, int repeats,
                                          std::uint64_t seed) {
  std::vector<BenchRecord> out;
  out.reserve(n_values.size());
  for (int n : n_values) out.push_back(bench_one(n, repeats, seed));
  return out;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const std::size_t m = std::min(x.size(), y.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = m * sxx - sx * sx;
  return denom == 0.0 ? 0.0 : (m * sxy - sx * sy) / denom;
}

struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double max_relative_residual = 0.0;
};

/// y ~ intercept + slope * x by least squares.
inline LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
  const std::size_t m = std::min(x.size(), y.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < m; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LinearFit fit;
  const double denom = m * sxx - sx * sx;
  fit.slope = denom == 0.0 ? 0.0 : (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / static_cast<double>(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double r = std::abs(fit.intercept + fit.slope * x[i] - y[i]) / std::abs(y[i]);
    fit.max_relative_residual = std::max(fit.max_relative_residual, r);
  }
  return fit;
}

struct BenchSlopes {
  double explicit_s, upward_s, downward_s;
  double explicit_bytes, upward_bytes, downward_bytes;
  double explicit_flops, upward_flops, downward_flops;
};

inline BenchSlopes bench_slopes(const std::vector<BenchRecord>& recs) {
  std::vector<double> n;
  std::vector<std::vector<double>> cols(9);
  for (const auto& r : recs) {
    n.push_back(r.n);
    const double vals[9] = {r.explicit_s, r.upward_s, r.downward_s,
                            static_cast<double>(r.explicit_bytes),
                            static_cast<double>(r.upward_bytes),
                            static_cast<double>(r.downward_bytes),
                            static_cast<double>(r.explicit_flops),
                            static_cast<double>(r.upward_flops),
                            static_cast<double>(r.downward_flops)};
    for (int c = 0; c < 9; ++c) cols[static_cast<std::size_t>(c)].push_back(std::max(vals[c], 1e-12));
  }
  auto s = [&](int c) { return loglog_slope(n, cols[static_cast<std::size_t>(c)]); };
  return {s(0), s(1), s(2), s(3), s(4), s(5), s(6), s(7), s(8)};
}

inline void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& recs) {
  out << "n,explicit_s,upward_s,downward_s,explicit_bytes,upward_bytes,downward_bytes,"
         "explicit_flops,upward_flops,downward_flops\n";
  char buf[256];
  for (const auto& r : recs) {
    std::snprintf(buf, sizeof buf, "%d,%.6e,%.6e,%.6e,%zu,%zu,%zu,%llu,%llu,%llu\n", r.n,
                  r.explicit_s, r.upward_s, r.downward_s, r.explicit_bytes, r.upward_bytes,
                  r.downward_bytes, static_cast<unsigned long long>(r.explicit_flops),
                  static_cast<unsigned long long>(r.upward_flops),
                  static_cast<unsigned long long>(r.downward_flops));
    out << buf;
  }
  if (recs.size() >= 2) {
    const BenchSlopes s = bench_slopes(recs);
    std::snprintf(buf, sizeof buf, "slope,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f\n",
                  s.explicit_s, s.upward_s, s.downward_s, s.explicit_bytes, s.upward_bytes,
                  s.downward_bytes, s.explicit_flops, s.upward_flops, s.downward_flops);
    out << buf;
  }
}

}  // namespace hqr

#endif  // HQR_BENCH_HPP
