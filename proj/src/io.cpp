#include "ssc/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include <fmt/format.h>

#include "ssc/error.hpp"

namespace ssc::io {

namespace {

constexpr char kGridMagic[4] = {'V', 'X', 'G', '1'};
constexpr char kDepthMagic[4] = {'D', 'P', 'M', '1'};
constexpr char kScoreMagic[4] = {'S', 'C', 'R', '1'};

class Writer {
 public:
  explicit Writer(std::size_t reserve) { out_.reserve(reserve); }

  void magic(const char (&m)[4]) { out_.insert(out_.end(), m, m + 4); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int s = 0; s < 32; s += 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void u64(std::uint64_t v) {
    for (int s = 0; s < 64; s += 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> data, std::string_view source)
      : data_(data), source_(source) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }

  [[noreturn]] void fail(const std::string& what) const { fail_at(pos_, what); }
  [[noreturn]] void fail_at(std::size_t offset, const std::string& what) const {
    throw FormatError(std::string(source_), offset, what);
  }

  void magic(const char (&m)[4]) {
    need(4, "magic");
    if (std::memcmp(data_.data() + pos_, m, 4) != 0) {
      fail(fmt::format("bad magic, expected \"{}\"", std::string_view(m, 4)));
    }
    pos_ += 4;
  }
  std::uint8_t u8() {
    need(1, "u8 field");
    return data_[pos_++];
  }
  std::uint16_t u16() {
    need(2, "u16 field");
    const auto v = static_cast<std::uint16_t>(data_[pos_] | (data_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4, "u32 field");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8, "u64 field");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

  /// Checks that exactly `bytes` payload bytes follow.
  void expect_payload(std::size_t bytes, std::string_view what) {
    if (remaining() != bytes) {
      fail(fmt::format("{} payload has {} bytes, expected {}", what, remaining(), bytes));
    }
  }

 private:
  void need(std::size_t n, std::string_view what) {
    if (remaining() < n) {
      fail(fmt::format("truncated header reading {}: {} bytes left, need {}", what,
                       remaining(), n));
    }
  }

  std::span<const std::uint8_t> data_;
  std::string_view source_;
  std::size_t pos_ = 0;
};

bool is_byte_dtype(GridDType dtype) { return dtype != GridDType::kScalar; }

std::uint32_t checked_u32(int v) { return static_cast<std::uint32_t>(v); }

void require_dtype(const GridFile& file, GridDType want, std::string_view source) {
  if (file.dtype != want) {
    throw FormatError(std::string(source), 4,
                      fmt::format("grid dtype is {} ({}), expected {} ({})",
                                  static_cast<int>(file.dtype), dtype_name(file.dtype),
                                  static_cast<int>(want), dtype_name(want)));
  }
}

std::size_t payload_offset(std::size_t index, std::size_t element) {
  return kGridHeaderSize + index * element;
}

}  // namespace

std::string_view dtype_name(GridDType dtype) {
  switch (dtype) {
    case GridDType::kLabels:
      return "labels";
    case GridDType::kScalar:
      return "f32 scalar";
    case GridDType::kLga:
      return "lga";
    case GridDType::kMask:
      return "mask";
  }
  return "unknown";
}

Bytes encode_grid(const GridFile& file) {
  file.geometry.validate();
  const std::size_t count = file.geometry.dims.count();
  const bool byte_payload = is_byte_dtype(file.dtype);
  if ((byte_payload ? file.bytes.size() : file.scalars.size()) != count) {
    throw std::invalid_argument("grid payload does not match dims");
  }
  Writer w(kGridHeaderSize + count * (byte_payload ? 1 : 4));
  w.magic(kGridMagic);
  w.u8(static_cast<std::uint8_t>(file.dtype));
  w.u32(checked_u32(file.geometry.dims.nx));
  w.u32(checked_u32(file.geometry.dims.ny));
  w.u32(checked_u32(file.geometry.dims.nz));
  w.f32(static_cast<float>(file.geometry.voxel_size));
  for (int a = 0; a < 3; ++a) w.f32(static_cast<float>(file.geometry.origin[a]));
  if (byte_payload) {
    for (const std::uint8_t b : file.bytes) w.u8(b);
  } else {
    for (const float f : file.scalars) w.f32(f);
  }
  return w.take();
}

GridFile decode_grid(std::span<const std::uint8_t> data, std::string_view source) {
  Reader r(data, source);
  r.magic(kGridMagic);
  const std::size_t dtype_offset = r.offset();
  const std::uint8_t code = r.u8();
  if (code > static_cast<std::uint8_t>(GridDType::kMask)) {
    r.fail_at(dtype_offset, fmt::format("unknown grid dtype {}", code));
  }
  GridFile file;
  file.dtype = static_cast<GridDType>(code);

  const std::size_t dims_offset = r.offset();
  std::uint32_t dims[3];
  for (auto& d : dims) d = r.u32();
  for (const std::uint32_t d : dims) {
    if (d == 0 || d > static_cast<std::uint32_t>(std::numeric_limits<int>::max())) {
      r.fail_at(dims_offset, fmt::format("invalid grid dims ({}, {}, {})", dims[0], dims[1],
                                         dims[2]));
    }
  }
  file.geometry.dims = {static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                        static_cast<int>(dims[2])};
  const std::size_t size_offset = r.offset();
  file.geometry.voxel_size = r.f32();
  for (int a = 0; a < 3; ++a) file.geometry.origin[a] = r.f32();
  if (!(file.geometry.voxel_size > 0.0) || !std::isfinite(file.geometry.voxel_size) ||
      !file.geometry.origin.allFinite()) {
    r.fail_at(size_offset, "voxel size must be positive and origin finite");
  }

  const std::size_t count = file.geometry.dims.count();
  if (is_byte_dtype(file.dtype)) {
    r.expect_payload(count, "grid");
    file.bytes.resize(count);
    for (auto& b : file.bytes) b = r.u8();
  } else {
    r.expect_payload(count * 4, "grid");
    file.scalars.resize(count);
    for (auto& f : file.scalars) f = r.f32();
  }
  return file;
}

GridFile make_grid_file(const LabelGrid& labels) {
  GridFile f{GridDType::kLabels, labels.geometry(), {}, {}};
  f.bytes.reserve(labels.size());
  for (const SemanticLabel l : labels) f.bytes.push_back(l.code());
  return f;
}

GridFile make_grid_file(const VoxelGrid<float>& scalars) {
  return {GridDType::kScalar, scalars.geometry(), {},
          std::vector<float>(scalars.begin(), scalars.end())};
}

GridFile make_grid_file(const VoxelGrid<double>& scalars) {
  GridFile f{GridDType::kScalar, scalars.geometry(), {}, {}};
  f.scalars.reserve(scalars.size());
  for (const double v : scalars) f.scalars.push_back(static_cast<float>(v));
  return f;
}

GridFile make_lga_file(const LgaGrid& lga) {
  return {GridDType::kLga, lga.geometry(), std::vector<std::uint8_t>(lga.begin(), lga.end()),
          {}};
}

GridFile make_mask_file(const VoxelMask& mask) {
  GridFile f{GridDType::kMask, mask.geometry(), {}, {}};
  f.bytes.reserve(mask.size());
  for (const std::uint8_t m : mask) f.bytes.push_back(m != 0 ? 1 : 0);
  return f;
}

LabelGrid to_labels(const GridFile& file, std::string_view source) {
  require_dtype(file, GridDType::kLabels, source);
  std::vector<SemanticLabel> labels;
  labels.reserve(file.bytes.size());
  for (std::size_t i = 0; i < file.bytes.size(); ++i) {
    if (file.bytes[i] >= kNumLabels) {
      throw FormatError(std::string(source), payload_offset(i, 1),
                        fmt::format("label {} outside 0..11", file.bytes[i]));
    }
    labels.emplace_back(file.bytes[i]);
  }
  return LabelGrid(file.geometry, std::move(labels));
}

VoxelGrid<float> to_scalars(const GridFile& file, std::string_view source) {
  require_dtype(file, GridDType::kScalar, source);
  return VoxelGrid<float>(file.geometry, file.scalars);
}

LgaGrid to_lga(const GridFile& file, std::string_view source) {
  require_dtype(file, GridDType::kLga, source);
  for (std::size_t i = 0; i < file.bytes.size(); ++i) {
    const std::uint8_t m = file.bytes[i];
    if (m > kLgaNeighbors && m != kLgaUndefined) {
      throw FormatError(std::string(source), payload_offset(i, 1),
                        fmt::format("LGA value {} is neither 0..6 nor 255", m));
    }
  }
  return LgaGrid(file.geometry, file.bytes);
}

VoxelMask to_mask(const GridFile& file, std::string_view source) {
  require_dtype(file, GridDType::kMask, source);
  for (std::size_t i = 0; i < file.bytes.size(); ++i) {
    if (file.bytes[i] > 1) {
      throw FormatError(std::string(source), payload_offset(i, 1),
                        fmt::format("mask value {} is not 0 or 1", file.bytes[i]));
    }
  }
  return VoxelMask(file.geometry, file.bytes);
}

Bytes encode_depth(const DepthMap& depth) {
  Writer w(kDepthHeaderSize + depth.size() * 2);
  w.magic(kDepthMagic);
  w.u32(checked_u32(depth.width()));
  w.u32(checked_u32(depth.height()));
  for (const double d : depth.values()) {
    const double mm = std::round(d * 1000.0);
    if (!(mm >= 0.0 && mm <= 65535.0)) {
      throw DomainError(fmt::format("depth {} m does not fit in u16 millimeters", d));
    }
    w.u16(static_cast<std::uint16_t>(mm));
  }
  return w.take();
}

DepthMap decode_depth(std::span<const std::uint8_t> data, std::string_view source) {
  Reader r(data, source);
  r.magic(kDepthMagic);
  const std::size_t dims_offset = r.offset();
  const std::uint32_t width = r.u32();
  const std::uint32_t height = r.u32();
  constexpr auto kMaxSide = static_cast<std::uint32_t>(std::numeric_limits<int>::max());
  if (width == 0 || height == 0 || width > kMaxSide || height > kMaxSide) {
    r.fail_at(dims_offset, fmt::format("invalid depth size {}x{}", width, height));
  }
  const std::size_t count = static_cast<std::size_t>(width) * height;
  r.expect_payload(count * 2, "depth");
  std::vector<double> meters(count);
  for (auto& m : meters) m = r.u16() / 1000.0;
  return DepthMap(static_cast<int>(width), static_cast<int>(height), std::move(meters));
}

ProbabilityVolume ScoreFile::probabilities() const {
  if (kind == ScoreKind::kLogits) return softmax(LogitVolume(voxels, classes, values));
  return ProbabilityVolume(voxels, classes, values);
}

Bytes encode_scores(const ScoreFile& file) {
  if (file.classes <= 0 ||
      file.values.size() != file.voxels * static_cast<std::size_t>(file.classes)) {
    throw std::invalid_argument("score payload does not match voxels x classes");
  }
  Writer w(kScoreHeaderSize + file.values.size() * 8);
  w.magic(kScoreMagic);
  w.u8(static_cast<std::uint8_t>(file.kind));
  w.u32(static_cast<std::uint32_t>(file.voxels));
  w.u32(checked_u32(file.classes));
  for (const double v : file.values) w.f64(v);
  return w.take();
}

ScoreFile decode_scores(std::span<const std::uint8_t> data, std::string_view source) {
  Reader r(data, source);
  r.magic(kScoreMagic);
  const std::size_t kind_offset = r.offset();
  const std::uint8_t kind = r.u8();
  if (kind > static_cast<std::uint8_t>(ScoreKind::kLogits)) {
    r.fail_at(kind_offset, fmt::format("unknown score kind {}", kind));
  }
  ScoreFile file;
  file.kind = static_cast<ScoreKind>(kind);
  file.voxels = r.u32();
  const std::size_t classes_offset = r.offset();
  const std::uint32_t classes = r.u32();
  if (classes == 0 || classes > 65535) {
    r.fail_at(classes_offset, fmt::format("invalid class count {}", classes));
  }
  file.classes = static_cast<int>(classes);
  const std::size_t count = file.voxels * classes;
  r.expect_payload(count * 8, "score");
  file.values.resize(count);
  for (auto& v : file.values) v = r.f64();
  return file;
}

std::string format_camera(const CameraModel& camera) {
  const auto& in = camera.intrinsics;
  const auto& rot = camera.pose.rotation();
  const auto& t = camera.pose.translation();
  std::string out = "# fx fy cx cy / rotation rows / translation (camera-to-world)\n";
  out += fmt::format("{} {} {} {}\n", in.fx, in.fy, in.cx, in.cy);
  for (int i = 0; i < 3; ++i) {
    out += fmt::format("{} {} {}\n", rot(i, 0), rot(i, 1), rot(i, 2));
  }
  out += fmt::format("{} {} {}\n", t.x(), t.y(), t.z());
  return out;
}

CameraModel parse_camera(std::string_view text, std::string_view source) {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> row_offsets;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    const std::size_t first = line.find_first_not_of(" \t\r");
    if (first != std::string_view::npos && line[first] != '#') {
      std::istringstream in{std::string(line)};
      std::vector<double> values;
      std::string token;
      while (in >> token) {
        std::size_t used = 0;
        double v = 0.0;
        try {
          v = std::stod(token, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used != token.size() || !std::isfinite(v)) {
          throw FormatError(std::string(source), pos,
                            fmt::format("camera line {}: '{}' is not a finite number",
                                        rows.size() + 1, token));
        }
        values.push_back(v);
      }
      rows.push_back(std::move(values));
      row_offsets.push_back(pos);
    }
    if (end == text.size()) break;
    pos = end + 1;
  }

  const std::size_t expected[5] = {4, 3, 3, 3, 3};
  if (rows.size() != 5) {
    throw FormatError(std::string(source), text.size(),
                      fmt::format("camera file has {} data lines, expected 5", rows.size()));
  }
  for (std::size_t i = 0; i < 5; ++i) {
    if (rows[i].size() != expected[i]) {
      throw FormatError(std::string(source), row_offsets[i],
                        fmt::format("camera line {} has {} values, expected {}", i + 1,
                                    rows[i].size(), expected[i]));
    }
  }

  CameraModel camera;
  camera.intrinsics = {rows[0][0], rows[0][1], rows[0][2], rows[0][3]};
  try {
    camera.intrinsics.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string(source), row_offsets[0], e.what());
  }
  Eigen::Matrix3d rot;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) rot(i, j) = rows[1 + i][j];
  }
  const Eigen::Vector3d t(rows[4][0], rows[4][1], rows[4][2]);
  try {
    camera.pose = CameraPose(rot, t);
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string(source), row_offsets[1], e.what());
  }
  return camera;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error reading " + path.string());
  return data;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("error writing " + path.string());
}

GridFile read_grid(const std::filesystem::path& path) {
  return decode_grid(read_file(path), path.string());
}
void write_grid(const std::filesystem::path& path, const GridFile& file) {
  write_file(path, encode_grid(file));
}
DepthMap read_depth(const std::filesystem::path& path) {
  return decode_depth(read_file(path), path.string());
}
void write_depth(const std::filesystem::path& path, const DepthMap& depth) {
  write_file(path, encode_depth(depth));
}
ScoreFile read_scores(const std::filesystem::path& path) {
  return decode_scores(read_file(path), path.string());
}
void write_scores(const std::filesystem::path& path, const ScoreFile& file) {
  write_file(path, encode_scores(file));
}
CameraModel read_camera(const std::filesystem::path& path) {
  const Bytes data = read_file(path);
  return parse_camera(std::string_view(reinterpret_cast<const char*>(data.data()), data.size()),
                      path.string());
}
void write_camera(const std::filesystem::path& path, const CameraModel& camera) {
  const std::string text = format_camera(camera);
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace ssc::io
