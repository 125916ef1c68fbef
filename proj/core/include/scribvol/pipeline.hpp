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

// End-to-end pseudo-label pipeline: ingest (phantom or files), simulate
// scribbles, keep a slice budget, expand, supervoxelize, paint pseudo
// labels and score them against ground truth.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "scribvol/losses.hpp"
#include "scribvol/propagate.hpp"
#include "scribvol/supervoxel.hpp"

namespace scribvol::pipeline {

inline constexpr const char* kConfigSchema = "scribvol.pipeline/1";
inline constexpr const char* kReportSchema = "scribvol.report/1";

enum class Method { kWatershed, kRandomWalker };

std::string to_string(Method m);
std::string to_string(propagate::SliceRanking r);

struct InputConfig {
  /// Phantom kind; used when `volume` is empty.
  std::string phantom = "multi_organ";
  Dims dims{64, 64, 16};
  Spacing spacing{1.0, 1.0, 4.0};
  double noise_sigma = 0.05;
  /// File inputs (.svol volume, .svol labels, optional .scrib scribbles).
  std::string volume;
  std::string labels;
  std::string scribbles;
};

struct PipelineConfig {
  InputConfig input;
  supervoxel::SlicParams slic{150, 0.4, 10};
  Method method = Method::kRandomWalker;
  propagate::SliceRanking ranking = propagate::SliceRanking::kSsim;
  double budget = 0.5;
  double erosion_radius = 1.0;
  propagate::RandomWalkerParams random_walker{};
  losses::LossConfig loss{};
  std::size_t k_p = 4;
  std::uint64_t prototype_seed = 7;
  std::uint64_t seed = 7;
  std::filesystem::path output_dir;

  /// Throws kConfig on invalid values or unresolvable input paths.
  void validate() const;
};

/// Parses a JSON config; missing keys take defaults, unknown keys are
/// rejected. Throws kConfig.
PipelineConfig parse_config(const std::string& text);
PipelineConfig load_config(const std::filesystem::path& path);
/// Canonical JSON; output_dir is omitted so manifests do not depend on it.
std::string config_to_json(const PipelineConfig& config);

struct RunResult {
  std::string report_json;
  std::string manifest_json;
  /// Mean over foreground classes of the pseudo-label Dice (percent).
  double pseudo_dice = 0.0;
  std::map<std::uint32_t, double> class_dice;
};

/// Runs every stage, writing artifacts, manifest.json and report.json into
/// config.output_dir. A failing stage throws kStage naming the stage;
/// artifacts of earlier stages stay on disk.
RunResult run_pipeline(const PipelineConfig& config);

/// Re-runs the config recorded in a manifest, writing into `output_dir`.
RunResult rerun_from_manifest(const std::filesystem::path& manifest,
                              const std::filesystem::path& output_dir);

struct SweepEntry {
  Method method;
  propagate::SliceRanking ranking;
  double budget;
  double pseudo_dice;
};

/// Budget sweep over {rw+ssim, watershed+ssim, watershed+equal}; each run
/// lands in output_dir/<method>_<ranking>_<percent>. Writes sweep.json.
std::vector<SweepEntry> run_sweep(const PipelineConfig& base, const std::vector<double>& budgets);

}  // namespace scribvol::pipeline
