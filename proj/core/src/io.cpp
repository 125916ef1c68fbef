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

#include "scribvol/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

namespace scribvol {

namespace {

constexpr const char* kMagic = "SVOL1";
constexpr const char* kEndHeader = "end_header";

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s, const std::string& what) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorCode::kFormat,
          "cannot parse " + what + ": '" + std::string(s) + "'");
  return v;
}

std::uint64_t parse_uint(std::string_view s, const std::string& what) {
  std::uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  require(res.ec == std::errc() && res.ptr == s.data() + s.size(), ErrorCode::kFormat,
          "cannot parse " + what + ": '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string_view kind_name(VolumeKind k) {
  switch (k) {
    case VolumeKind::kScalar: return "scalar";
    case VolumeKind::kLabel: return "label";
    case VolumeKind::kProbability: return "probability";
    case VolumeKind::kScribbles: return "scribbles";
  }
  return "scalar";
}

std::size_t dtype_size(const std::string& dtype) {
  if (dtype == "f32" || dtype == "u32") return 4;
  if (dtype == "f64") return 8;
  if (dtype == "u8") return 1;
  fail(ErrorCode::kFormat, "unsupported dtype '" + dtype + "'");
}

template <typename T>
void append_le(std::string& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  out.append(bytes, sizeof(T));
}

template <typename T>
T read_le(const char* p) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes, bytes + sizeof(T));
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

std::string common_header(VolumeKind kind, const Geometry& g) {
  std::ostringstream os;
  os << kMagic << "\n";
  os << "kind: " << kind_name(kind) << "\n";
  os << "dims: " << g.dims().nx << " " << g.dims().ny << " " << g.dims().nz << "\n";
  os << "spacing_mm: " << format_double(g.spacing().x) << " " << format_double(g.spacing().y) << " "
     << format_double(g.spacing().z) << "\n";
  return os.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  require(static_cast<bool>(out), ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path) {
  require(std::filesystem::exists(path), ErrorCode::kIo, "file not found: '" + path.string() + "'");
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

struct Parsed {
  SvolHeader header;
  std::string_view body;  // everything after the end_header line
};

Parsed parse(const std::string& bytes, const std::filesystem::path& path) {
  Parsed parsed;
  std::map<std::string, std::string> fields;
  std::size_t pos = 0;
  bool first = true;
  bool terminated = false;
  while (pos < bytes.size()) {
    std::size_t nl = bytes.find('\n', pos);
    require(nl != std::string::npos, ErrorCode::kFormat,
            "unterminated header in '" + path.string() + "'");
    std::string_view line(bytes.data() + pos, nl - pos);
    pos = nl + 1;
    if (first) {
      require(line == kMagic, ErrorCode::kFormat, "bad magic in '" + path.string() + "'");
      first = false;
      continue;
    }
    if (line == kEndHeader) {
      terminated = true;
      break;
    }
    auto colon = line.find(':');
    require(colon != std::string_view::npos, ErrorCode::kFormat,
            "malformed header line '" + std::string(line) + "'");
    std::string key(line.substr(0, colon));
    std::string_view value = line.substr(colon + 1);
    while (!value.empty() && value.front() == ' ') value.remove_prefix(1);
    fields[key] = std::string(value);
  }
  require(!first && terminated, ErrorCode::kFormat, "missing header in '" + path.string() + "'");
  parsed.body = std::string_view(bytes).substr(pos);

  auto field = [&](const char* key) -> const std::string& {
    auto it = fields.find(key);
    require(it != fields.end(), ErrorCode::kFormat,
            std::string("header is missing '") + key + "' in '" + path.string() + "'");
    return it->second;
  };

  SvolHeader& h = parsed.header;
  const std::string& kind = field("kind");
  if (kind == "scalar") h.kind = VolumeKind::kScalar;
  else if (kind == "label") h.kind = VolumeKind::kLabel;
  else if (kind == "probability") h.kind = VolumeKind::kProbability;
  else if (kind == "scribbles") h.kind = VolumeKind::kScribbles;
  else fail(ErrorCode::kFormat, "unknown kind '" + kind + "'");

  auto dims = split_ws(field("dims"));
  require(dims.size() == 3, ErrorCode::kFormat, "dims needs three integers");
  h.dims = Dims{parse_uint(dims[0], "dims"), parse_uint(dims[1], "dims"), parse_uint(dims[2], "dims")};
  auto sp = split_ws(field("spacing_mm"));
  require(sp.size() == 3, ErrorCode::kFormat, "spacing_mm needs three reals");
  h.spacing = Spacing{parse_double(sp[0], "spacing"), parse_double(sp[1], "spacing"),
                      parse_double(sp[2], "spacing")};

  if (h.kind == VolumeKind::kScribbles) {
    h.count = parse_uint(field("count"), "count");
    return parsed;
  }
  h.dtype = field("dtype");
  require(field("encoding") == "little-endian", ErrorCode::kFormat, "only little-endian payloads");
  h.payload_bytes = parse_uint(field("payload_bytes"), "payload_bytes");
  if (h.kind == VolumeKind::kLabel) {
    h.num_labels = static_cast<std::uint32_t>(parse_uint(field("num_labels"), "num_labels"));
  }
  if (h.kind == VolumeKind::kProbability) {
    h.num_classes = parse_uint(field("num_classes"), "num_classes");
    h.simplex = parse_uint(field("simplex"), "simplex") != 0;
  }
  return parsed;
}

/// Checks declared and actual payload size against dims and dtype.
void check_payload(const Parsed& p, std::size_t values_per_voxel, const std::filesystem::path& path) {
  const auto& h = p.header;
  const std::size_t expected = h.dims.count() * values_per_voxel * dtype_size(h.dtype);
  require(p.body.size() == h.payload_bytes && h.payload_bytes == expected,
          ErrorCode::kPayloadMismatch,
          "payload of '" + path.string() + "' has " + std::to_string(p.body.size()) +
              " bytes; dims/dtype require " + std::to_string(expected));
}

template <typename Out>
std::vector<Out> decode(std::string_view body, const std::string& dtype, std::size_t n) {
  std::vector<Out> out(n);
  const char* p = body.data();
  for (std::size_t i = 0; i < n; ++i) {
    if (dtype == "f32") out[i] = static_cast<Out>(read_le<float>(p + 4 * i));
    else if (dtype == "f64") out[i] = static_cast<Out>(read_le<double>(p + 8 * i));
    else if (dtype == "u32") out[i] = static_cast<Out>(read_le<std::uint32_t>(p + 4 * i));
    else out[i] = static_cast<Out>(static_cast<std::uint8_t>(p[i]));
  }
  return out;
}

Parsed load_kind(const std::string& bytes, VolumeKind kind, const std::filesystem::path& path) {
  Parsed p = parse(bytes, path);
  require(p.header.kind == kind, ErrorCode::kFormat,
          "'" + path.string() + "' holds a " + std::string(kind_name(p.header.kind)) +
              " volume, expected " + std::string(kind_name(kind)));
  return p;
}

}  // namespace

SvolHeader read_header(const std::filesystem::path& path) {
  return parse(read_file(path), path).header;
}

ScalarVolume load_volume(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  Parsed p = load_kind(bytes, VolumeKind::kScalar, path);
  check_payload(p, 1, path);
  Geometry g(p.header.dims, p.header.spacing);
  return ScalarVolume(g, decode<float>(p.body, p.header.dtype, g.voxel_count()));
}

void save_volume(const ScalarVolume& volume, const std::filesystem::path& path) {
  std::string out = common_header(VolumeKind::kScalar, volume.geometry());
  out += "dtype: f32\nencoding: little-endian\norder: x-fastest\n";
  out += "payload_bytes: " + std::to_string(volume.size() * 4) + "\n";
  out += std::string(kEndHeader) + "\n";
  out.reserve(out.size() + volume.size() * 4);
  for (float v : volume.data()) append_le(out, v);
  write_file(path, out);
}

LabelVolume load_labels(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  Parsed p = load_kind(bytes, VolumeKind::kLabel, path);
  require(p.header.dtype == "u8" || p.header.dtype == "u32", ErrorCode::kFormat,
          "label volumes use u8 or u32");
  check_payload(p, 1, path);
  Geometry g(p.header.dims, p.header.spacing);
  return LabelVolume(g, decode<std::uint32_t>(p.body, p.header.dtype, g.voxel_count()),
                     p.header.num_labels);
}

void save_labels(const LabelVolume& labels, const std::filesystem::path& path) {
  const bool narrow = labels.num_labels() <= 256;
  std::string out = common_header(VolumeKind::kLabel, labels.geometry());
  out += std::string("dtype: ") + (narrow ? "u8" : "u32") + "\n";
  out += "encoding: little-endian\norder: x-fastest\n";
  out += "num_labels: " + std::to_string(labels.num_labels()) + "\n";
  out += "payload_bytes: " + std::to_string(labels.size() * (narrow ? 1 : 4)) + "\n";
  out += std::string(kEndHeader) + "\n";
  for (std::uint32_t v : labels.data()) {
    if (narrow) out.push_back(static_cast<char>(static_cast<std::uint8_t>(v)));
    else append_le(out, v);
  }
  write_file(path, out);
}

ProbabilityVolume load_probabilities(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  Parsed p = load_kind(bytes, VolumeKind::kProbability, path);
  require(p.header.dtype == "f64" || p.header.dtype == "f32", ErrorCode::kFormat,
          "probability volumes use f64 or f32");
  require(p.header.num_classes >= 1, ErrorCode::kFormat, "num_classes must be >= 1");
  check_payload(p, p.header.num_classes, path);
  Geometry g(p.header.dims, p.header.spacing);
  return ProbabilityVolume(
      g, p.header.num_classes,
      decode<double>(p.body, p.header.dtype, g.voxel_count() * p.header.num_classes),
      p.header.simplex);
}

void save_probabilities(const ProbabilityVolume& probs, const std::filesystem::path& path) {
  std::string out = common_header(VolumeKind::kProbability, probs.geometry());
  out += "dtype: f64\nencoding: little-endian\norder: x-fastest,class-fastest\n";
  out += "num_classes: " + std::to_string(probs.num_classes()) + "\n";
  out += std::string("simplex: ") + (probs.simplex() ? "1" : "0") + "\n";
  out += "payload_bytes: " + std::to_string(probs.data().size() * 8) + "\n";
  out += std::string(kEndHeader) + "\n";
  for (double v : probs.data()) append_le(out, v);
  write_file(path, out);
}

ScribbleSet load_scribbles(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  Parsed p = load_kind(bytes, VolumeKind::kScribbles, path);
  std::vector<Scribble> entries;
  entries.reserve(p.header.count);
  std::size_t pos = 0;
  const std::string_view body = p.body;
  while (pos < body.size()) {
    std::size_t nl = body.find('\n', pos);
    if (nl == std::string_view::npos) nl = body.size();
    auto tokens = split_ws(body.substr(pos, nl - pos));
    pos = nl + 1;
    if (tokens.empty()) continue;
    require(tokens.size() == 4, ErrorCode::kFormat, "scribble lines are 'x y z label'");
    auto coord = [&](std::string_view t) {
      std::int64_t v = 0;
      auto res = std::from_chars(t.data(), t.data() + t.size(), v);
      require(res.ec == std::errc() && res.ptr == t.data() + t.size(), ErrorCode::kFormat,
              "bad scribble coordinate '" + std::string(t) + "'");
      return v;
    };
    entries.push_back(Scribble{Index3{coord(tokens[0]), coord(tokens[1]), coord(tokens[2])},
                               static_cast<std::uint32_t>(parse_uint(tokens[3], "label"))});
  }
  require(entries.size() == p.header.count, ErrorCode::kPayloadMismatch,
          "'" + path.string() + "' declares " + std::to_string(p.header.count) + " scribbles, has " +
              std::to_string(entries.size()));
  return ScribbleSet(Geometry(p.header.dims, p.header.spacing), std::move(entries));
}

void save_scribbles(const ScribbleSet& scribbles, const std::filesystem::path& path) {
  std::string out = common_header(VolumeKind::kScribbles, scribbles.geometry());
  out += "count: " + std::to_string(scribbles.size()) + "\n";
  out += std::string(kEndHeader) + "\n";
  for (const auto& s : scribbles.entries()) {
    out += std::to_string(s.voxel.x) + " " + std::to_string(s.voxel.y) + " " +
           std::to_string(s.voxel.z) + " " + std::to_string(s.label) + "\n";
  }
  write_file(path, out);
}

}  // namespace scribvol
