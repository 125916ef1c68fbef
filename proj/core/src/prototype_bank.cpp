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

// JSON persistence for prototype banks.

#include <fstream>

#include "json.hpp"
#include "scribvol/shapeprior.hpp"

namespace scribvol::shape {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "scribvol.prototype_bank";
constexpr int kVersion = 1;

json spreads_to_json(const std::vector<Spread>& s) {
  json arr = json::array();
  for (const auto& v : s) arr.push_back(v ? json(*v) : json(nullptr));
  return arr;
}

std::vector<Spread> spreads_from_json(const json& arr) {
  std::vector<Spread> out;
  for (const auto& v : arr) {
    if (v.is_null()) {
      out.emplace_back(std::nullopt);
    } else {
      out.emplace_back(v.get<std::array<double, 3>>());
    }
  }
  return out;
}

}  // namespace

void save_bank(const PrototypeBank& bank, const std::filesystem::path& path) {
  json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["num_classes"] = bank.num_classes;
  doc["samples"] = bank.samples;
  json classes = json::array();
  for (const auto& [label, protos] : bank.prototypes) {
    json entry;
    entry["label"] = label;
    json list = json::array();
    for (const auto& p : protos) {
      list.push_back({{"r_max", p.r_max}, {"points", p.points}, {"histograms", p.histograms}});
    }
    entry["prototypes"] = std::move(list);
    classes.push_back(std::move(entry));
  }
  doc["classes"] = std::move(classes);
  json moments = json::array();
  for (const auto& m : bank.moments) {
    moments.push_back({{"ratio", m.ratio},
                       {"spread", spreads_to_json(m.spread)},
                       {"spread_literal", spreads_to_json(m.spread_literal)}});
  }
  doc["moments"] = std::move(moments);

  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot write prototype bank " + path.string());
  out << doc.dump(1) << '\n';
  require(static_cast<bool>(out), ErrorCode::kIo, "failed writing prototype bank " + path.string());
}

PrototypeBank load_bank(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open prototype bank " + path.string());
  PrototypeBank bank;
  try {
    const json doc = json::parse(in);
    require(doc.at("format") == kFormat && doc.at("version") == kVersion, ErrorCode::kFormat,
            "unsupported prototype bank format in " + path.string());
    bank.num_classes = doc.at("num_classes").get<std::size_t>();
    bank.samples = doc.at("samples").get<std::size_t>();
    for (const auto& entry : doc.at("classes")) {
      auto& protos = bank.prototypes[entry.at("label").get<std::uint32_t>()];
      for (const auto& p : entry.at("prototypes")) {
        SkeletonContext ctx;
        ctx.r_max = p.at("r_max").get<double>();
        ctx.points = p.at("points").get<std::vector<std::array<double, 2>>>();
        ctx.histograms = p.at("histograms").get<std::vector<Histogram>>();
        require(ctx.points.size() == ctx.histograms.size(), ErrorCode::kFormat,
                "prototype points and histograms differ in length");
        protos.push_back(std::move(ctx));
      }
    }
    for (const auto& m : doc.at("moments")) {
      ShapeMoments sm;
      sm.ratio = m.at("ratio").get<std::vector<double>>();
      sm.spread = spreads_from_json(m.at("spread"));
      sm.spread_literal = spreads_from_json(m.at("spread_literal"));
      require(sm.ratio.size() == bank.num_classes && sm.spread.size() == bank.num_classes &&
                  sm.spread_literal.size() == bank.num_classes,
              ErrorCode::kFormat, "moment table does not match num_classes");
      bank.moments.push_back(std::move(sm));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, "malformed prototype bank " + path.string() + ": " + e.what());
  }
  return bank;
}

}  // namespace scribvol::shape
