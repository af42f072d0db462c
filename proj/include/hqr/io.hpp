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

#ifndef HQR_IO_HPP
#define HQR_IO_HPP

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hqr/common.hpp"

namespace hqr {

// Vector files hold one decimal value per line; '#' lines are comments.
// Spectral vectors carry a "# spectral n=<beads>" header.

inline void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  const auto old_precision = out.precision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i) out << v(i) << '\n';
  out.precision(old_precision);
}

inline void write_spectral(std::ostream& out, const Eigen::VectorXd& w, std::size_t beads) {
  out << "# spectral n=" << beads << '\n';
  write_vector(out, w);
}

inline Eigen::VectorXd read_vector(std::istream& in) {
  std::vector<double> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream field(line);
    double x = 0.0;
    std::string extra;
    if (!(field >> x) || (field >> extra)) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": expected one number");
    }
    values.push_back(x);
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace hqr

#endif  // HQR_IO_HPP
