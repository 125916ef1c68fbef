// Copyright 2026 The scribvol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>

namespace scribvol {

/// Pairwise (cascade) summation. The reduction tree depends only on the
/// length, so results are reproducible regardless of threading.
double pairwise_sum(std::span<const double> values);

/// Worker count used by parallel_for; 1 (the default) runs inline.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Each index must write disjoint outputs.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Stage-specific seed derived from a run seed and a fixed stage label.
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

}  // namespace scribvol
