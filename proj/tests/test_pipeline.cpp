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

#include <cstdlib>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"
#include "scribvol/io.hpp"
#include "scribvol/pipeline.hpp"
#include "test_util.hpp"

using namespace scribvol;
using namespace scribvol::pipeline;
using testutil::throws_code;
using json = nlohmann::json;

namespace {

PipelineConfig small_config(const std::filesystem::path& out) {
  PipelineConfig c;
  c.input.dims = {24, 24, 8};
  c.slic.k = 40;
  c.output_dir = out;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

#ifdef SCRIBVOL_CLI_PATH
int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SCRIBVOL_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
#endif

}  // namespace

TEST_CASE("config parsing") {
  const std::string schema = std::string("\"schema\": \"") + kConfigSchema + "\"";
  CHECK(parse_config("{" + schema + "}").budget == 0.5);
  CHECK(throws_code([&] { parse_config("{" + schema + ", \"bogus\": 1}"); }, ErrorCode::kConfig));
  CHECK(throws_code([&] { parse_config("{" + schema + ", \"propagation\": {\"budgt\": 1}}"); }, ErrorCode::kConfig));
  CHECK(throws_code([&] { parse_config("{\"schema\": \"other/9\"}"); }, ErrorCode::kConfig));
  CHECK(throws_code([&] { parse_config("{" + schema + ", \"seed\": \"seven\"}"); }, ErrorCode::kConfig));
  CHECK(throws_code([&] { parse_config("not json"); }, ErrorCode::kConfig));
  CHECK(throws_code([&] { parse_config("{" + schema + ", \"propagation\": {\"method\": \"flood\"}}"); },
                    ErrorCode::kConfig));

  PipelineConfig c;
  c.budget = 0.25;
  c.method = Method::kWatershed;
  c.loss.beta2 = 0.0;
  const auto back = parse_config(config_to_json(c));
  CHECK(back.budget == 0.25);
  CHECK(back.method == Method::kWatershed);
  CHECK(back.loss.beta2 == 0.0);
  CHECK(config_to_json(back) == config_to_json(c));

  PipelineConfig bad;
  bad.budget = 0.0;
  CHECK(throws_code([&] { bad.validate(); }, ErrorCode::kConfig));
  bad.budget = 0.5;
  bad.input.dims = {4, 32, 8};
  CHECK(throws_code([&] { bad.validate(); }, ErrorCode::kConfig));
}

TEST_CASE("pipeline runs") {
  testutil::TempDir dir("pipeline");
  SUBCASE("artifacts and determinism") {
    const auto a = run_pipeline(small_config(dir / "a"));
    const auto b = run_pipeline(small_config(dir / "b"));
    CHECK(a.report_json == b.report_json);
    CHECK(a.manifest_json == b.manifest_json);
    for (const char* f : {"volume.svol", "pseudo.svol", "confidence.svol", "scribbles_expanded.scrib"}) {
      CHECK(slurp(dir / "a" / f) == slurp(dir / "b" / f));
    }
    const auto report = json::parse(a.report_json);
    CHECK(report.at("schema") == kReportSchema);
    CHECK(report.at("full_annotation") == false);
    CHECK(a.pseudo_dice >= 0.0);
    CHECK(a.pseudo_dice <= 100.0);

    const auto again = rerun_from_manifest(dir / "a" / "manifest.json", dir / "c");
    CHECK(again.report_json == a.report_json);
  }
  SUBCASE("full budget skips expansion") {
    auto c = small_config(dir / "full");
    c.budget = 1.0;
    const auto report = json::parse(run_pipeline(c).report_json);
    CHECK(report.at("full_annotation") == true);
    CHECK(report.at("note").get<std::string>().find("full annotation") == 0);
    CHECK(report.at("scribbles").at("budget") == report.at("scribbles").at("expanded"));
  }
  SUBCASE("stage failures name the stage") {
    const Geometry g({8, 8, 8}, {});
    save_volume(ScalarVolume::filled(g, 0.5f), dir / "v.svol");
    save_labels(LabelVolume(g, std::vector<std::uint32_t>(g.voxel_count(), 0), 2), dir / "l.svol");
    save_scribbles(ScribbleSet(Geometry({9, 8, 8}, {}), {{{1, 1, 1}, 1}}), dir / "s.scrib");
    auto c = small_config(dir / "staged");
    c.input.volume = (dir / "v.svol").string();
    c.input.labels = (dir / "l.svol").string();
    c.input.scribbles = (dir / "s.scrib").string();
    try {
      run_pipeline(c);
      FAIL("expected a stage error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kStage);
      CHECK(std::string(e.what()).find("ingest") != std::string::npos);
    }
  }
  SUBCASE("missing input file is a config error") {
    auto c = small_config(dir / "missing");
    c.input.volume = (dir / "nope.svol").string();
    c.input.labels = (dir / "nope.svol").string();
    CHECK(throws_code([&] { run_pipeline(c); }, ErrorCode::kConfig));
  }
}

#ifdef SCRIBVOL_CLI_PATH
TEST_CASE("command-line exit codes") {
  testutil::TempDir dir("cli");
  std::ofstream(dir / "bad.json") << "{\"schema\": \"" << kConfigSchema << "\", \"nope\": 1}";
  CHECK(run_cli("pipeline --config " + (dir / "bad.json").string() + " --out " + (dir / "o").string()) == 2);
  CHECK(run_cli("--no-such-flag") == 1);
  CHECK(run_cli("phantom --kind sphere --dims 16,16,8 --out " + (dir / "p.svol").string() + " --gt " +
                (dir / "g.svol").string()) == 0);
  CHECK(load_volume(dir / "p.svol").geometry().dims() == Dims{16, 16, 8});
  CHECK(run_cli("loss --which bce --values 1,1,1,1,1") == 4);
  CHECK(run_cli("loss --which total --values 1,1,1,1,1") == 0);
}
#endif
