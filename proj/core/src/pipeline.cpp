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

#include "scribvol/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "json.hpp"
#include "scribvol/evalsim.hpp"
#include "scribvol/io.hpp"
#include "scribvol/numeric.hpp"

namespace scribvol::pipeline {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  require(obj.is_object(), ErrorCode::kConfig, where + " must be a JSON object");
  for (const auto& [key, value] : obj.items()) {
    require(allowed.count(key) > 0, ErrorCode::kConfig, "unknown config key '" + where + "." + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::kConfig, "config key '" + where + "." + key + "' has the wrong type");
  }
}

Method parse_method(const std::string& s) {
  if (s == "rw") return Method::kRandomWalker;
  if (s == "watershed") return Method::kWatershed;
  fail(ErrorCode::kConfig, "propagation.method must be 'rw' or 'watershed', got '" + s + "'");
}

propagate::SliceRanking parse_ranking(const std::string& s) {
  if (s == "ssim") return propagate::SliceRanking::kSsim;
  if (s == "equal") return propagate::SliceRanking::kEqualInterval;
  fail(ErrorCode::kConfig, "propagation.ranking must be 'ssim' or 'equal', got '" + s + "'");
}

json config_json(const PipelineConfig& c) {
  const auto& in = c.input;
  return {
      {"schema", kConfigSchema},
      {"seed", c.seed},
      {"input",
       {{"phantom", in.phantom},
        {"dims", {in.dims.nx, in.dims.ny, in.dims.nz}},
        {"spacing", {in.spacing.x, in.spacing.y, in.spacing.z}},
        {"noise_sigma", in.noise_sigma},
        {"volume", in.volume},
        {"labels", in.labels},
        {"scribbles", in.scribbles}}},
      {"supervoxel", {{"k", c.slic.k}, {"compactness", c.slic.compactness}, {"max_iters", c.slic.max_iters}}},
      {"propagation",
       {{"method", to_string(c.method)},
        {"ranking", to_string(c.ranking)},
        {"budget", c.budget},
        {"erosion_radius", c.erosion_radius},
        {"beta", c.random_walker.beta},
        {"threshold", c.random_walker.threshold}}},
      {"loss",
       {{"lambda1", c.loss.lambda1},
        {"lambda2", c.loss.lambda2},
        {"beta1", c.loss.beta1},
        {"beta2", c.loss.beta2},
        {"beta3", c.loss.beta3},
        {"literal_volume_out", c.loss.literal_volume_out}}},
      {"prototypes", {{"k_p", c.k_p}, {"seed", c.prototype_seed}}},
  };
}

PipelineConfig config_from(const json& doc) {
  check_keys(doc, {"schema", "seed", "input", "supervoxel", "propagation", "loss", "prototypes", "output_dir"},
             "config");
  require(doc.contains("schema") && doc.at("schema") == kConfigSchema, ErrorCode::kConfig,
          std::string("config schema must be '") + kConfigSchema + "'");
  PipelineConfig c;
  read(doc, "seed", c.seed, "config");
  std::string out_dir;
  read(doc, "output_dir", out_dir, "config");
  c.output_dir = out_dir;
  if (doc.contains("input")) {
    const json& in = doc.at("input");
    check_keys(in, {"phantom", "dims", "spacing", "noise_sigma", "volume", "labels", "scribbles"}, "input");
    read(in, "phantom", c.input.phantom, "input");
    read(in, "noise_sigma", c.input.noise_sigma, "input");
    read(in, "volume", c.input.volume, "input");
    read(in, "labels", c.input.labels, "input");
    read(in, "scribbles", c.input.scribbles, "input");
    if (in.contains("dims")) {
      std::array<std::size_t, 3> d{};
      read(in, "dims", d, "input");
      c.input.dims = {d[0], d[1], d[2]};
    }
    if (in.contains("spacing")) {
      std::array<double, 3> s{};
      read(in, "spacing", s, "input");
      c.input.spacing = {s[0], s[1], s[2]};
    }
  }
  if (doc.contains("supervoxel")) {
    const json& sv = doc.at("supervoxel");
    check_keys(sv, {"k", "compactness", "max_iters"}, "supervoxel");
    read(sv, "k", c.slic.k, "supervoxel");
    read(sv, "compactness", c.slic.compactness, "supervoxel");
    read(sv, "max_iters", c.slic.max_iters, "supervoxel");
  }
  if (doc.contains("propagation")) {
    const json& p = doc.at("propagation");
    check_keys(p, {"method", "ranking", "budget", "erosion_radius", "beta", "threshold"}, "propagation");
    std::string method = to_string(c.method);
    std::string ranking = to_string(c.ranking);
    read(p, "method", method, "propagation");
    read(p, "ranking", ranking, "propagation");
    c.method = parse_method(method);
    c.ranking = parse_ranking(ranking);
    read(p, "budget", c.budget, "propagation");
    read(p, "erosion_radius", c.erosion_radius, "propagation");
    read(p, "beta", c.random_walker.beta, "propagation");
    read(p, "threshold", c.random_walker.threshold, "propagation");
  }
  if (doc.contains("loss")) {
    const json& l = doc.at("loss");
    check_keys(l, {"lambda1", "lambda2", "beta1", "beta2", "beta3", "literal_volume_out"}, "loss");
    read(l, "lambda1", c.loss.lambda1, "loss");
    read(l, "lambda2", c.loss.lambda2, "loss");
    read(l, "beta1", c.loss.beta1, "loss");
    read(l, "beta2", c.loss.beta2, "loss");
    read(l, "beta3", c.loss.beta3, "loss");
    read(l, "literal_volume_out", c.loss.literal_volume_out, "loss");
  }
  if (doc.contains("prototypes")) {
    const json& pr = doc.at("prototypes");
    check_keys(pr, {"k_p", "seed"}, "prototypes");
    read(pr, "k_p", c.k_p, "prototypes");
    read(pr, "seed", c.prototype_seed, "prototypes");
  }
  return c;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::kIo, "failed writing " + path.string());
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kConfig, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs one stage; any failure is re-raised as kStage naming the stage.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    fail(ErrorCode::kStage, std::string("stage '") + name + "' failed [" + std::string(to_string(e.code())) +
                                "]: " + e.what());
  } catch (const std::exception& e) {
    fail(ErrorCode::kStage, std::string("stage '") + name + "' failed: " + e.what());
  }
}

std::string percent_tag(double budget) {
  return std::to_string(static_cast<int>(std::lround(budget * 100.0)));
}

}  // namespace

std::string to_string(Method m) { return m == Method::kRandomWalker ? "rw" : "watershed"; }

std::string to_string(propagate::SliceRanking r) {
  return r == propagate::SliceRanking::kSsim ? "ssim" : "equal";
}

void PipelineConfig::validate() const {
  require(budget > 0.0 && budget <= 1.0, ErrorCode::kConfig, "budget fraction must be in (0, 1]");
  require(slic.k >= 1 && slic.max_iters >= 1 && std::isfinite(slic.compactness) && slic.compactness >= 0.0,
          ErrorCode::kConfig, "supervoxel parameters need k >= 1, max_iters >= 1, compactness >= 0");
  require(std::isfinite(erosion_radius) && erosion_radius >= 0.0, ErrorCode::kConfig,
          "erosion_radius must be >= 0");
  require(random_walker.beta > 0.0 && random_walker.threshold > 0.5 && random_walker.threshold <= 1.0,
          ErrorCode::kConfig, "random walker needs beta > 0 and threshold in (0.5, 1]");
  require(k_p >= 1, ErrorCode::kConfig, "prototypes.k_p must be >= 1");
  try {
    loss.validate();
  } catch (const Error& e) {
    fail(ErrorCode::kConfig, e.what());
  }
  if (input.volume.empty()) {
    try {
      (void)eval::parse_phantom_kind(input.phantom);
      (void)Geometry(input.dims, input.spacing);
    } catch (const Error& e) {
      fail(ErrorCode::kConfig, e.what());
    }
    require(input.dims.nx >= 8 && input.dims.ny >= 8 && input.dims.nz >= 8, ErrorCode::kConfig,
            "phantom dims must be >= 8 along every axis");
    require(std::isfinite(input.noise_sigma) && input.noise_sigma >= 0.0, ErrorCode::kConfig,
            "noise_sigma must be >= 0");
  } else {
    require(!input.labels.empty(), ErrorCode::kConfig,
            "file input needs input.labels (ground truth) next to input.volume");
    for (const auto& p : {input.volume, input.labels, input.scribbles}) {
      if (!p.empty()) require(fs::exists(p), ErrorCode::kConfig, "input path does not exist: " + p);
    }
  }
}

PipelineConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("config is not valid JSON: ") + e.what());
  }
  return config_from(doc);
}

PipelineConfig load_config(const fs::path& path) { return parse_config(read_text(path)); }

std::string config_to_json(const PipelineConfig& config) { return config_json(config).dump(2) + "\n"; }

RunResult run_pipeline(const PipelineConfig& config) {
  config.validate();
  require(!config.output_dir.empty(), ErrorCode::kConfig, "output_dir is required");
  const fs::path out = config.output_dir;
  std::error_code ec;
  fs::create_directories(out, ec);
  require(!ec, ErrorCode::kConfig, "cannot create output directory " + out.string());

  const std::uint64_t phantom_seed = derive_seed(config.seed, "phantom");
  const std::uint64_t simulate_seed = derive_seed(config.seed, "simulate");
  const std::uint64_t expand_seed = derive_seed(config.seed, "expand");
  const std::uint64_t slic_seed = derive_seed(config.seed, "supervoxel");

  RunResult result;
  json manifest = {{"schema", "scribvol.manifest/1"},
                   {"config", config_json(config)},
                   {"seeds",
                    {{"phantom", phantom_seed},
                     {"simulate", simulate_seed},
                     {"expand", expand_seed},
                     {"supervoxel", slic_seed}}},
                   {"artifacts",
                    {"volume.svol", "ground_truth.svol", "scribbles_full.scrib", "scribbles_budget.scrib",
                     "scribbles_expanded.scrib", "supervoxels.svol", "pseudo.svol", "confidence.svol",
                     "report.json"}}};
  result.manifest_json = manifest.dump(2) + "\n";
  write_text(out / "manifest.json", result.manifest_json);

  struct Ingested {
    ScalarVolume volume;
    LabelVolume gt;
    std::optional<ScribbleSet> scribbles;
  };
  const Ingested data = stage("ingest", [&] {
    if (config.input.volume.empty()) {
      auto ph = eval::make_phantom(eval::parse_phantom_kind(config.input.phantom), config.input.dims,
                                   config.input.spacing, config.input.noise_sigma, phantom_seed);
      return Ingested{std::move(ph.volume), std::move(ph.labels), std::nullopt};
    }
    auto v = load_volume(config.input.volume);
    auto g = load_labels(config.input.labels);
    require_same_geometry(v.geometry(), g.geometry(), "volume vs ground truth");
    std::optional<ScribbleSet> s;
    if (!config.input.scribbles.empty()) s = validate_scribbles(load_scribbles(config.input.scribbles), v);
    return Ingested{std::move(v), std::move(g), std::move(s)};
  });
  save_volume(data.volume, out / "volume.svol");
  save_labels(data.gt, out / "ground_truth.svol");

  const ScribbleSet full = stage("simulate", [&] {
    return data.scribbles ? *data.scribbles : eval::simulate_scribbles(data.gt, simulate_seed);
  });
  save_scribbles(full, out / "scribbles_full.scrib");

  const auto candidates = full.annotated_slices();
  const std::set<std::size_t> chosen = stage("budget", [&] {
    return propagate::select_annotated_slices(data.volume, full, config.budget, config.ranking);
  });
  const ScribbleSet budgeted = propagate::restrict_to_slices(full, chosen);
  save_scribbles(budgeted, out / "scribbles_budget.scrib");
  const bool full_annotation = chosen.size() == candidates.size();

  const ScribbleSet expanded = stage("expand", [&] {
    if (full_annotation) return budgeted;
    if (config.method == Method::kWatershed) {
      return propagate::expand_watershed(data.volume, budgeted, config.erosion_radius);
    }
    return propagate::expand_random_walker(data.volume, budgeted, config.random_walker);
  });
  save_scribbles(expanded, out / "scribbles_expanded.scrib");

  const supervoxel::SupervoxelMap sv =
      stage("supervoxel", [&] { return supervoxel::slic3d(data.volume, config.slic); });
  save_labels(sv.labels(), out / "supervoxels.svol");

  const std::uint32_t num_classes = std::max(data.gt.num_labels(), 2u);
  const propagate::PseudoLabels pl =
      stage("pseudo_labels", [&] { return propagate::pseudo_labels(sv, expanded, num_classes); });
  save_labels(pl.m_pseudo, out / "pseudo.svol");
  save_labels(pl.m_voxel, out / "confidence.svol");

  json report = stage("metrics", [&] {
    std::vector<std::uint32_t> pred(pl.m_pseudo.size(), 0);
    std::size_t supervised = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
      if (pl.m_voxel[i]) {
        pred[i] = pl.m_pseudo[i];
        ++supervised;
      }
    }
    const LabelVolume pred_vol(data.gt.geometry(), std::move(pred), num_classes);
    json per_class = json::object();
    std::vector<double> dices;
    for (std::uint32_t c = 1; c < num_classes; ++c) {
      const auto d = eval::dice(pred_vol, data.gt, c);
      const auto h = eval::hd95(pred_vol, data.gt, c);
      const auto p = eval::precision(pred_vol, data.gt, c);
      per_class[std::to_string(c)] = {{"dice", d.value},
                                      {"dice_empty", d.empty},
                                      {"hd95_mm", h ? json(*h) : json(nullptr)},
                                      {"precision", p ? json(*p) : json(nullptr)}};
      dices.push_back(d.value);
      result.class_dice[c] = d.value;
    }
    result.pseudo_dice = pairwise_sum(dices) / static_cast<double>(dices.size());
    std::vector<std::size_t> chosen_list(chosen.begin(), chosen.end());
    return json{{"schema", kReportSchema},
                {"method", to_string(config.method)},
                {"ranking", to_string(config.ranking)},
                {"budget", config.budget},
                {"full_annotation", full_annotation},
                {"note", full_annotation ? "full annotation: expansion skipped" : "partial annotation expanded"},
                {"candidate_slices", candidates.size()},
                {"annotated_slices", chosen_list},
                {"scribbles",
                 {{"full", full.size()}, {"budget", budgeted.size()}, {"expanded", expanded.size()}}},
                {"supervoxels", sv.count()},
                {"supervised_fraction",
                 static_cast<double>(supervised) / static_cast<double>(pl.m_voxel.size())},
                {"pseudo_label",
                 {{"mean_dice", result.pseudo_dice}, {"per_class", per_class}}}};
  });
  result.report_json = report.dump(2) + "\n";
  write_text(out / "report.json", result.report_json);
  return result;
}

RunResult rerun_from_manifest(const fs::path& manifest, const fs::path& output_dir) {
  json doc;
  try {
    doc = json::parse(read_text(manifest));
  } catch (const json::exception& e) {
    fail(ErrorCode::kConfig, std::string("manifest is not valid JSON: ") + e.what());
  }
  require(doc.contains("config"), ErrorCode::kConfig, "manifest has no config section");
  PipelineConfig c = config_from(doc.at("config"));
  c.output_dir = output_dir;
  return run_pipeline(c);
}

std::vector<SweepEntry> run_sweep(const PipelineConfig& base, const std::vector<double>& budgets) {
  require(!base.output_dir.empty(), ErrorCode::kConfig, "output_dir is required");
  const std::pair<Method, propagate::SliceRanking> combos[] = {
      {Method::kRandomWalker, propagate::SliceRanking::kSsim},
      {Method::kWatershed, propagate::SliceRanking::kSsim},
      {Method::kWatershed, propagate::SliceRanking::kEqualInterval}};
  std::vector<SweepEntry> entries;
  json rows = json::array();
  for (const auto& [method, ranking] : combos) {
    for (double b : budgets) {
      PipelineConfig c = base;
      c.method = method;
      c.ranking = ranking;
      c.budget = b;
      c.output_dir = base.output_dir / (to_string(method) + "_" + to_string(ranking) + "_" + percent_tag(b));
      const RunResult r = run_pipeline(c);
      entries.push_back({method, ranking, b, r.pseudo_dice});
      rows.push_back({{"method", to_string(method)},
                      {"ranking", to_string(ranking)},
                      {"budget", b},
                      {"pseudo_dice", r.pseudo_dice}});
    }
  }
  write_text(base.output_dir / "sweep.json", json{{"schema", "scribvol.sweep/1"}, {"runs", rows}}.dump(2) + "\n");
  return entries;
}

}  // namespace scribvol::pipeline
