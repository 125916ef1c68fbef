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

// Release acceptance criteria. Each check returns a verdict plus a one-line
// summary of what it measured.

#pragma once

#include <filesystem>
#include <string>

namespace criteria {

struct Verdict {
  bool pass = false;
  std::string detail;
};

Verdict gradient_suite();
Verdict oracle_equivalence();
Verdict loss_sanity();
Verdict slic_invariants();
// Runs the budget sweep once; both protocol criteria read the same runs.
struct SweepVerdicts {
  Verdict trend;
  Verdict quality;
};
SweepVerdicts budget_sweep(const std::filesystem::path& work_dir);
Verdict skeleton_context_properties();
Verdict kmedoids_properties();
Verdict scribble_simulation();
Verdict reproducibility(const std::filesystem::path& work_dir);

}  // namespace criteria
