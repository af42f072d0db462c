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

#ifndef HQR_COMMON_HPP
#define HQR_COMMON_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hqr {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;

// Small matrices with a compile-time upper bound; no heap allocation.
using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 9, 9>;
using SmallVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 9, 1>;

enum class ErrorCode {
  InvalidModel,
  DuplicateBeads,
  TooSmall,
  SizeGuard,
  LengthMismatch,
  BodyTooSmall,
  ShapeMismatch,
  SingularH,
  ParseError,
  BadArgs,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidModel: return "InvalidModel";
    case ErrorCode::DuplicateBeads: return "DuplicateBeads";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::SizeGuard: return "SizeGuard";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::BodyTooSmall: return "BodyTooSmall";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SingularH: return "SingularH";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::BadArgs: return "BadArgs";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Per-thread floating point operation counter. Kernels add their
// analytic operation counts; callers reset/read around a region.
namespace flops {

inline thread_local std::uint64_t counter = 0;

inline void add(std::uint64_t count) noexcept { counter += count; }
inline void reset() noexcept { counter = 0; }
inline std::uint64_t read() noexcept { return counter; }

}  // namespace flops

// Default limit on 3n for anything that stores a dense 3n x 3n matrix.
inline constexpr int kDefaultDenseGuard = 6000;

}  // namespace hqr

#endif  // HQR_COMMON_HPP
