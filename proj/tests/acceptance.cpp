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

// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any
// criterion fails. Usage: scribvol_acceptance [work_dir]

#include <exception>
#include <filesystem>
#include <functional>
#include <iostream>

#include "criteria.hpp"
#include "scribvol/error.hpp"

namespace {

criteria::Verdict guarded(const std::function<criteria::Verdict()>& check) {
  try {
    return check();
  } catch (const scribvol::Error& e) {
    return {false, "threw [" + std::string(scribvol::to_string(e.code())) + "] " + e.what()};
  } catch (const std::exception& e) {
    return {false, std::string("threw ") + e.what()};
  }
}

}  // namespace

int main(int argc, char** argv) {
  namespace fs = std::filesystem;
  const fs::path work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "scribvol_acceptance";
  fs::remove_all(work);
  fs::create_directories(work);

  criteria::SweepVerdicts sweep;
  try {
    sweep = criteria::budget_sweep(work);
  } catch (const std::exception& e) {
    sweep.trend = sweep.quality = {false, std::string("sweep threw: ") + e.what()};
  }

  const std::pair<const char*, criteria::Verdict> results[] = {
      {"gradient suite", guarded(criteria::gradient_suite)},
      {"oracle equivalence", guarded(criteria::oracle_equivalence)},
      {"loss sanity", guarded(criteria::loss_sanity)},
      {"supervoxel invariants", guarded(criteria::slic_invariants)},
      {"budget trend", sweep.trend},
      {"phantom pseudo-label quality", sweep.quality},
      {"skeleton context properties", guarded(criteria::skeleton_context_properties)},
      {"k-medoids", guarded(criteria::kmedoids_properties)},
      {"scribble simulation", guarded(criteria::scribble_simulation)},
      {"reproducibility", guarded([&] { return criteria::reproducibility(work); })},
  };
  int failed = 0;
  int index = 1;
  for (const auto& [name, verdict] : results) {
    std::cout << "criterion " << index++ << " [" << name << "]: " << (verdict.pass ? "PASS" : "FAIL") << " - "
              << verdict.detail << "\n";
    failed += !verdict.pass;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << "\n";
  return failed == 0 ? 0 : 1;
}
