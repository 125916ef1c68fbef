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

// scribvol command-line tool.
//
// Exit codes: 0 success, 1 usage error, 2 config error, 3 pipeline stage
// error, 4 any other failure (bad input data, I/O).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "scribvol/boundary.hpp"
#include "scribvol/evalsim.hpp"
#include "scribvol/io.hpp"
#include "scribvol/losses.hpp"
#include "scribvol/numeric.hpp"
#include "scribvol/pipeline.hpp"
#include "scribvol/propagate.hpp"
#include "scribvol/shapeprior.hpp"
#include "scribvol/supervoxel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scribvol;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;
  bool literal = false;
  bool normalize = false;
};

ScalarVolume read_volume(const Globals& g, const std::string& path) {
  auto v = load_volume(path);
  return g.normalize ? normalize_intensities(v) : v;
}

void emit_json(const json& doc, const std::string& path) {
  const std::string text = doc.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write " + path);
  out << text;
}

template <std::size_t N, typename T>
std::array<T, N> parse_triple(const std::string& text, const char* what) {
  std::array<T, N> out{};
  std::stringstream ss(text);
  std::string item;
  std::size_t i = 0;
  while (std::getline(ss, item, ',')) {
    require(i < N, ErrorCode::kInvalidArgument, std::string(what) + " needs exactly 3 values");
    try {
      if constexpr (std::is_integral_v<T>) {
        out[i++] = static_cast<T>(std::stoull(item));
      } else {
        out[i++] = static_cast<T>(std::stod(item));
      }
    } catch (const std::exception&) {
      fail(ErrorCode::kInvalidArgument, std::string("cannot parse ") + what + " value '" + item + "'");
    }
  }
  require(i == N, ErrorCode::kInvalidArgument, std::string(what) + " needs exactly 3 values");
  return out;
}

json loss_json(const losses::LossValue& v) {
  return {{"value", v.value}, {"per_term_breakdown", v.terms}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"scribvol: scribble-supervised volume tooling"};
  app.require_subcommand(1);
  // Global flags may also follow the subcommand.
  app.fallthrough();
  Globals g;
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Base seed (overrides config and per-command defaults)");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--literal-paper-formulas", g.literal,
               "Literal mode: outside-volume term weighted by u, centroid spread divided by the grid size");
  app.add_flag("--normalize-intensities", g.normalize, "Rescale loaded volumes to [0, 1]");

  // supervoxel
  auto* sv_cmd = app.add_subcommand("supervoxel", "SLIC supervoxels");
  std::string sv_in, sv_out;
  supervoxel::SlicParams slic;
  sv_cmd->add_option("--in", sv_in, "Input volume (.svol)")->required();
  sv_cmd->add_option("--out", sv_out, "Output supervoxel labels (.svol)")->required();
  sv_cmd->add_option("--k", slic.k, "Target supervoxel count");
  sv_cmd->add_option("--compactness", slic.compactness, "Spatial weight");
  sv_cmd->add_option("--max-iters", slic.max_iters, "Iteration cap");

  // propagate
  auto* pr_cmd = app.add_subcommand("propagate", "Pseudo and confidence masks from scribbles and supervoxels");
  std::string pr_vol, pr_scrib, pr_sv, pr_out, pr_conf;
  std::uint32_t pr_classes = 0;
  pr_cmd->add_option("--vol", pr_vol, "Input volume (.svol)")->required();
  pr_cmd->add_option("--scrib", pr_scrib, "Scribbles (.scrib)")->required();
  pr_cmd->add_option("--sv", pr_sv, "Supervoxel labels (.svol)")->required();
  pr_cmd->add_option("--out", pr_out, "Pseudo mask output (.svol)")->required();
  pr_cmd->add_option("--confidence", pr_conf, "Confidence mask output (.svol)")->required();
  pr_cmd->add_option("--num-classes", pr_classes, "Class count including background (default: inferred)");

  // expand
  auto* ex_cmd = app.add_subcommand("expand", "Keep a slice budget and expand scribbles to other slices");
  std::string ex_vol, ex_scrib, ex_out, ex_method = "rw", ex_rank = "ssim";
  double ex_budget = 1.0, ex_erosion = 1.0;
  propagate::RandomWalkerParams ex_rw;
  ex_cmd->add_option("--vol", ex_vol, "Input volume (.svol)")->required();
  ex_cmd->add_option("--scrib", ex_scrib, "Full scribbles (.scrib)")->required();
  ex_cmd->add_option("--out", ex_out, "Expanded scribbles (.scrib)")->required();
  ex_cmd->add_option("--method", ex_method, "watershed or rw")->check(CLI::IsMember({"watershed", "rw"}));
  ex_cmd->add_option("--budget-frac", ex_budget, "Fraction of annotated slices kept")->check(CLI::Range(0.0, 1.0));
  ex_cmd->add_option("--rank", ex_rank, "ssim or equal")->check(CLI::IsMember({"ssim", "equal"}));
  ex_cmd->add_option("--erosion", ex_erosion, "Watershed erosion radius (voxels of the finest spacing)");
  ex_cmd->add_option("--beta", ex_rw.beta, "Random-walker edge sharpness");
  ex_cmd->add_option("--threshold", ex_rw.threshold, "Random-walker probability threshold");

  // boundary
  auto* bd_cmd = app.add_subcommand("boundary", "Static boundary volume from per-slice edges");
  std::string bd_vol, bd_out, bd_edges, bd_strength;
  boundary::EdgeParams bd_params;
  bool bd_absolute = false;
  bd_cmd->add_option("--vol", bd_vol, "Input volume (.svol)");
  bd_cmd->add_option("--out", bd_out, "Binary boundary output (.svol)")->required();
  bd_cmd->add_option("--edges", bd_edges, "External edge volume to binarize at 0.5 instead");
  bd_cmd->add_option("--low-q", bd_params.low, "Low hysteresis threshold");
  bd_cmd->add_option("--high-q", bd_params.high, "High hysteresis threshold");
  bd_cmd->add_option("--sigma", bd_params.sigma, "Gaussian smoothing sigma (pixels)");
  bd_cmd->add_flag("--absolute", bd_absolute, "Treat thresholds as gradient magnitudes, not quantiles");
  bd_cmd->add_option("--strength", bd_strength, "Optional edge-strength output (.svol)");

  // loss
  auto* ls_cmd = app.add_subcommand("loss", "Evaluate a loss and print JSON");
  std::string ls_which, ls_pred, ls_target, ls_pseudo, ls_conf, ls_vol, ls_out;
  std::vector<double> ls_values;
  losses::LossConfig ls_cfg;
  ls_cmd->add_option("--which", ls_which, "bce, pce, ab or total")
      ->required()
      ->check(CLI::IsMember({"bce", "pce", "ab", "total"}));
  ls_cmd->add_option("--pred", ls_pred, "Probability volume (.svol)");
  ls_cmd->add_option("--target", ls_target, "Binary boundary labels for bce (.svol)");
  ls_cmd->add_option("--pseudo", ls_pseudo, "Pseudo mask for pce (.svol)");
  ls_cmd->add_option("--confidence", ls_conf, "Confidence mask for pce (.svol)");
  ls_cmd->add_option("--vol", ls_vol, "Intensity volume for ab (.svol)");
  ls_cmd->add_option("--values", ls_values, "seg_init seg_final bry ab sp for total")->expected(5)->delimiter(',');
  ls_cmd->add_option("--lambda1", ls_cfg.lambda1);
  ls_cmd->add_option("--lambda2", ls_cfg.lambda2);
  ls_cmd->add_option("--beta1", ls_cfg.beta1);
  ls_cmd->add_option("--beta2", ls_cfg.beta2);
  ls_cmd->add_option("--beta3", ls_cfg.beta3);
  ls_cmd->add_option("--report", ls_out, "Write JSON here instead of stdout");

  // prototypes
  auto* pt_cmd = app.add_subcommand("prototypes", "Build a prototype bank from unpaired masks");
  std::string pt_dir, pt_out;
  shape::BankParams pt_params;
  std::size_t pt_classes = 0;
  pt_cmd->add_option("--masks", pt_dir, "Directory of label volumes (.svol)")->required()->check(CLI::ExistingDirectory);
  pt_cmd->add_option("--class", pt_params.classes, "Foreground class to summarize (repeatable; default all)");
  pt_cmd->add_option("--kp", pt_params.k_p, "Prototypes per class")->check(CLI::PositiveNumber);
  pt_cmd->add_option("--samples", pt_params.samples, "Skeleton sample points");
  pt_cmd->add_option("--num-classes", pt_classes, "Class count including background (default: inferred)");
  pt_cmd->add_option("--out", pt_out, "Bank output (.json)")->required();

  // shape-score
  auto* ss_cmd = app.add_subcommand("shape-score", "Score a prediction against a prototype bank");
  std::string ss_pred, ss_bank, ss_out;
  double ss_lambda = 1.0;
  ss_cmd->add_option("--pred", ss_pred, "Prediction: label or probability volume (.svol)")->required();
  ss_cmd->add_option("--bank", ss_bank, "Prototype bank (.json)")->required();
  ss_cmd->add_option("--lambda", ss_lambda, "Spread penalty weight");
  ss_cmd->add_option("--report", ss_out, "Write JSON here instead of stdout");

  // metrics
  auto* mt_cmd = app.add_subcommand("metrics", "Dice, HD95 and precision per class");
  std::string mt_pred, mt_gt, mt_out;
  mt_cmd->add_option("--pred", mt_pred, "Predicted labels (.svol)")->required();
  mt_cmd->add_option("--gt", mt_gt, "Ground-truth labels (.svol)")->required();
  mt_cmd->add_option("--report", mt_out, "Write JSON here instead of stdout");

  // simulate
  auto* sm_cmd = app.add_subcommand("simulate", "Simulate scribbles from a label volume");
  std::string sm_gt, sm_out;
  sm_cmd->add_option("--gt", sm_gt, "Ground-truth labels (.svol)")->required();
  sm_cmd->add_option("--out", sm_out, "Scribbles output (.scrib)")->required();

  // phantom
  auto* ph_cmd = app.add_subcommand("phantom", "Generate a synthetic phantom");
  std::string ph_kind = "multi_organ", ph_dims = "64,64,16", ph_spacing = "1,1,4", ph_out, ph_gt;
  double ph_noise = 0.05;
  ph_cmd->add_option("--kind", ph_kind, "sphere, two_region or multi_organ")
      ->check(CLI::IsMember({"sphere", "two_region", "multi_organ"}));
  ph_cmd->add_option("--dims", ph_dims, "nx,ny,nz");
  ph_cmd->add_option("--spacing", ph_spacing, "sx,sy,sz in mm");
  ph_cmd->add_option("--noise", ph_noise, "Gaussian noise sigma");
  ph_cmd->add_option("--out", ph_out, "Volume output (.svol)")->required();
  ph_cmd->add_option("--gt", ph_gt, "Label output (.svol)")->required();

  // pipeline
  auto* pl_cmd = app.add_subcommand("pipeline", "Run the end-to-end pipeline from a JSON config");
  std::string pl_config, pl_manifest, pl_out;
  bool pl_sweep = false;
  pl_cmd->add_option("--config", pl_config, "Pipeline config (.json)");
  pl_cmd->add_option("--manifest", pl_manifest, "Re-run the config recorded in a manifest");
  pl_cmd->add_option("--out", pl_out, "Output directory (overrides the config)");
  pl_cmd->add_flag("--sweep", pl_sweep, "Budget sweep over 25/50/75/100% for the three method pairs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }
  if (*seed_opt) g.seed = seed_value;
  set_thread_count(g.threads);
  const shape::SpreadMode spread_mode = g.literal ? shape::SpreadMode::kLiteral : shape::SpreadMode::kWeighted;

  try {
    if (*sv_cmd) {
      const auto map = supervoxel::slic3d(read_volume(g, sv_in), slic);
      save_labels(map.labels(), sv_out);
      std::cout << "supervoxels: " << map.count() << "\n";
    } else if (*pr_cmd) {
      const auto vol = read_volume(g, pr_vol);
      const auto scrib = validate_scribbles(load_scribbles(pr_scrib), vol);
      const supervoxel::SupervoxelMap map(load_labels(pr_sv), vol);
      const auto pl = propagate::pseudo_labels(map, scrib, pr_classes);
      save_labels(pl.m_pseudo, pr_out);
      save_labels(pl.m_voxel, pr_conf);
    } else if (*ex_cmd) {
      const auto vol = read_volume(g, ex_vol);
      const auto full = validate_scribbles(load_scribbles(ex_scrib), vol);
      const auto ranking = ex_rank == "ssim" ? propagate::SliceRanking::kSsim : propagate::SliceRanking::kEqualInterval;
      const auto chosen = propagate::select_annotated_slices(vol, full, ex_budget, ranking);
      const auto kept = propagate::restrict_to_slices(full, chosen);
      const auto out = ex_method == "watershed" ? propagate::expand_watershed(vol, kept, ex_erosion)
                                                : propagate::expand_random_walker(vol, kept, ex_rw);
      save_scribbles(out, ex_out);
      std::cout << "kept slices: " << chosen.size() << ", scribbles: " << kept.size() << " -> " << out.size()
                << "\n";
    } else if (*bd_cmd) {
      if (!bd_edges.empty()) {
        save_labels(boundary::binarize_edges(read_volume(g, bd_edges)), bd_out);
      } else {
        require(!bd_vol.empty(), ErrorCode::kInvalidArgument, "boundary needs --vol or --edges");
        bd_params.mode = bd_absolute ? boundary::ThresholdMode::kAbsolute : boundary::ThresholdMode::kQuantile;
        const auto sb = boundary::static_boundary(read_volume(g, bd_vol), bd_params);
        save_labels(sb.y_b, bd_out);
        if (!bd_strength.empty()) save_volume(sb.strength, bd_strength);
        for (std::size_t z : sb.degenerate_slices) std::cerr << "warning: degenerate slice " << z << "\n";
      }
    } else if (*ls_cmd) {
      ls_cfg.literal_volume_out = g.literal;
      losses::LossValue v;
      if (ls_which == "total") {
        require(ls_values.size() == 5, ErrorCode::kInvalidArgument, "--values needs 5 numbers");
        auto lv = [](double x) { return losses::LossValue{x, std::nullopt, {}}; };
        v = losses::total_loss(lv(ls_values[0]), lv(ls_values[1]), lv(ls_values[2]), lv(ls_values[3]),
                               lv(ls_values[4]), ls_cfg);
      } else {
        require(!ls_pred.empty(), ErrorCode::kInvalidArgument, "--pred is required");
        const auto pred = load_probabilities(ls_pred);
        if (ls_which == "bce") {
          require(!ls_target.empty(), ErrorCode::kInvalidArgument, "bce needs --target");
          v = losses::bce_boundary(pred, load_labels(ls_target));
        } else if (ls_which == "pce") {
          require(!ls_pseudo.empty() && !ls_conf.empty(), ErrorCode::kInvalidArgument,
                  "pce needs --pseudo and --confidence");
          const auto pseudo = load_labels(ls_pseudo);
          const auto conf = load_labels(ls_conf);
          require_same_geometry(pseudo.geometry(), conf.geometry(), "pseudo vs confidence");
          const auto k = static_cast<std::uint32_t>(pred.num_classes());
          v = losses::partial_ce(pred, propagate::PseudoLabels{pseudo, conf, k, k});
        } else {
          require(!ls_vol.empty(), ErrorCode::kInvalidArgument, "ab needs --vol");
          v = losses::active_boundary(pred, read_volume(g, ls_vol), ls_cfg);
        }
      }
      emit_json(loss_json(v), ls_out);
    } else if (*pt_cmd) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(pt_dir)) {
        if (e.is_regular_file() && e.path().extension() == ".svol") files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      require(!files.empty(), ErrorCode::kInvalidArgument, "no .svol masks in " + pt_dir);
      std::vector<LabelVolume> masks;
      std::size_t k = pt_classes;
      for (const auto& f : files) {
        masks.push_back(load_labels(f));
        if (pt_classes == 0) k = std::max<std::size_t>(k, masks.back().num_labels());
      }
      if (g.seed) pt_params.seed = *g.seed;
      const auto bank = shape::build_bank(masks, k, pt_params);
      shape::save_bank(bank, pt_out);
      for (const auto& [label, protos] : bank.prototypes) {
        std::cout << "class " << label << ": " << protos.size() << " prototypes\n";
      }
    } else if (*ss_cmd) {
      const auto bank = shape::load_bank(ss_bank);
      const auto header = read_header(ss_pred);
      std::optional<ProbabilityVolume> probs;
      std::optional<LabelVolume> labels;
      if (header.kind == VolumeKind::kProbability) {
        probs = load_probabilities(ss_pred);
        labels = probs->argmax();
      } else {
        labels = load_labels(ss_pred);
        require(labels->num_labels() <= bank.num_classes, ErrorCode::kInvalidArgument,
                "prediction has labels beyond the bank's classes");
        probs = ProbabilityVolume::one_hot(*labels, bank.num_classes);
      }
      const auto shape_loss = shape::shape_moment_loss(*probs, bank, ss_lambda, spread_mode);
      const auto skel = shape::skeleton_prior_loss(*labels, bank);
      json per_class = json::object();
      for (const auto& [label, v] : skel.per_class) per_class[std::to_string(label)] = v ? json(*v) : json(nullptr);
      emit_json({{"L_shape", shape_loss.value},
                 {"L_skeleton", skel.value},
                 {"L_SP", shape_loss.value + skel.value},
                 {"shape_terms", shape_loss.terms},
                 {"per_class", per_class}},
                ss_out);
    } else if (*mt_cmd) {
      const auto pred = load_labels(mt_pred);
      const auto gt = load_labels(mt_gt);
      json per_class = json::object();
      std::vector<double> dices;
      const std::uint32_t top = std::max(pred.num_labels(), gt.num_labels());
      for (std::uint32_t c = 1; c < top; ++c) {
        const auto d = eval::dice(pred, gt, c);
        const auto h = eval::hd95(pred, gt, c);
        const auto p = eval::precision(pred, gt, c);
        per_class[std::to_string(c)] = {{"dice", d.value},
                                        {"dice_empty", d.empty},
                                        {"hd95_mm", h ? json(*h) : json(nullptr)},
                                        {"precision", p ? json(*p) : json(nullptr)}};
        dices.push_back(d.value);
      }
      const double mean = dices.empty() ? 0.0 : pairwise_sum(dices) / static_cast<double>(dices.size());
      emit_json({{"per_class", per_class}, {"mean_dice", mean}}, mt_out);
    } else if (*sm_cmd) {
      const auto gt = load_labels(sm_gt);
      const auto s = eval::simulate_scribbles(gt, g.seed.value_or(7));
      save_scribbles(s, sm_out);
      std::cout << "scribbles: " << s.size() << "\n";
    } else if (*ph_cmd) {
      const auto d = parse_triple<3, std::size_t>(ph_dims, "--dims");
      const auto s = parse_triple<3, double>(ph_spacing, "--spacing");
      const auto ph = eval::make_phantom(eval::parse_phantom_kind(ph_kind), Dims{d[0], d[1], d[2]},
                                         Spacing{s[0], s[1], s[2]}, ph_noise, g.seed.value_or(7));
      save_volume(ph.volume, ph_out);
      save_labels(ph.labels, ph_gt);
    } else if (*pl_cmd) {
      if (!pl_manifest.empty()) {
        require(!pl_out.empty(), ErrorCode::kConfig, "--manifest needs --out");
        const auto r = pipeline::rerun_from_manifest(pl_manifest, pl_out);
        std::cout << "pseudo-label dice: " << r.pseudo_dice << "\n";
        return 0;
      }
      require(!pl_config.empty(), ErrorCode::kConfig, "pipeline needs --config or --manifest");
      auto cfg = pipeline::load_config(pl_config);
      if (!pl_out.empty()) cfg.output_dir = pl_out;
      if (g.seed) cfg.seed = *g.seed;
      if (g.literal) cfg.loss.literal_volume_out = true;
      if (pl_sweep) {
        for (const auto& e : pipeline::run_sweep(cfg, {0.25, 0.5, 0.75, 1.0})) {
          std::cout << pipeline::to_string(e.method) << "+" << pipeline::to_string(e.ranking) << " "
                    << e.budget << ": " << e.pseudo_dice << "\n";
        }
      } else {
        const auto r = pipeline::run_pipeline(cfg);
        std::cout << "pseudo-label dice: " << r.pseudo_dice << "\n";
      }
    }
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    if (e.code() == ErrorCode::kConfig) return 2;
    if (e.code() == ErrorCode::kStage) return 3;
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
