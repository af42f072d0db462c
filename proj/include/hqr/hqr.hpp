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

#ifndef HQR_HQR_HPP
#define HQR_HQR_HPP

#include "hqr/bench.hpp"
#include "hqr/common.hpp"
#include "hqr/factor.hpp"
#include "hqr/generate.hpp"
#include "hqr/io.hpp"
#include "hqr/matfree.hpp"
#include "hqr/model.hpp"
#include "hqr/oracle.hpp"
#include "hqr/small_lq.hpp"
#include "hqr/tree.hpp"

#endif  // HQR_HQR_HPP
