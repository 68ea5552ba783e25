#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssc/camera.hpp"
#include "ssc/grid.hpp"
#include "ssc/lga.hpp"
#include "ssc/loss.hpp"

namespace ssc::io {

using Bytes = std::vector<std::uint8_t>;

// Grid file ("VXG1"), little-endian:
//   magic[4] | dtype u8 | nx ny nz u32 | voxel_size f32 | origin xyz f32 | payload
// Payload is x-fastest, then y, then z.
enum class GridDType : std::uint8_t {
  kLabels = 0,  // u8 semantic labels 0..11
  kScalar = 1,  // f32
  kLga = 2,     // u8 0..6, 255 = undefined
  kMask = 3,    // u8 0/1
};

inline constexpr std::size_t kGridHeaderSize = 33;

std::string_view dtype_name(GridDType dtype);

/// Decoded grid file. Exactly one of `bytes` / `scalars` is populated,
/// depending on the dtype.
struct GridFile {
  GridDType dtype = GridDType::kLabels;
  GridGeometry geometry;
  std::vector<std::uint8_t> bytes;
  std::vector<float> scalars;
};

Bytes encode_grid(const GridFile& file);
/// Throws FormatError naming `source` and the failing byte offset.
GridFile decode_grid(std::span<const std::uint8_t> data, std::string_view source);

GridFile make_grid_file(const LabelGrid& labels);
GridFile make_grid_file(const VoxelGrid<float>& scalars);
/// Values are narrowed to f32.
GridFile make_grid_file(const VoxelGrid<double>& scalars);
GridFile make_lga_file(const LgaGrid& lga);
GridFile make_mask_file(const VoxelMask& mask);

/// Typed views; throw FormatError on a dtype mismatch or invalid values.
LabelGrid to_labels(const GridFile& file, std::string_view source);
VoxelGrid<float> to_scalars(const GridFile& file, std::string_view source);
LgaGrid to_lga(const GridFile& file, std::string_view source);
VoxelMask to_mask(const GridFile& file, std::string_view source);

// Depth file ("DPM1"): magic[4] | width u32 | height u32 | u16 millimeters,
// row-major, 0 = invalid.
inline constexpr std::size_t kDepthHeaderSize = 12;

/// Depths are rounded to whole millimeters. Throws DomainError for depths that
/// do not fit in u16 millimeters.
Bytes encode_depth(const DepthMap& depth);
DepthMap decode_depth(std::span<const std::uint8_t> data, std::string_view source);

// Score file ("SCR1"): magic[4] | kind u8 | voxels u32 | classes u32 | f64
// row-major voxels x classes.
enum class ScoreKind : std::uint8_t { kProbabilities = 0, kLogits = 1 };

inline constexpr std::size_t kScoreHeaderSize = 13;

struct ScoreFile {
  ScoreKind kind = ScoreKind::kProbabilities;
  std::size_t voxels = 0;
  int classes = 0;
  std::vector<double> values;

  /// Softmax is applied for logit files.
  ProbabilityVolume probabilities() const;
};

Bytes encode_scores(const ScoreFile& file);
ScoreFile decode_scores(std::span<const std::uint8_t> data, std::string_view source);

// Camera file, plain text:
//   fx fy cx cy
//   r00 r01 r02
//   r10 r11 r12
//   r20 r21 r22
//   tx ty tz
// Lines starting with '#' and blank lines are ignored.
struct CameraModel {
  CameraIntrinsics intrinsics;
  CameraPose pose;
};

std::string format_camera(const CameraModel& camera);
CameraModel parse_camera(std::string_view text, std::string_view source);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data);

GridFile read_grid(const std::filesystem::path& path);
void write_grid(const std::filesystem::path& path, const GridFile& file);
DepthMap read_depth(const std::filesystem::path& path);
void write_depth(const std::filesystem::path& path, const DepthMap& depth);
ScoreFile read_scores(const std::filesystem::path& path);
void write_scores(const std::filesystem::path& path, const ScoreFile& file);
CameraModel read_camera(const std::filesystem::path& path);
void write_camera(const std::filesystem::path& path, const CameraModel& camera);

}  // namespace ssc::io
