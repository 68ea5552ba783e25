#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace ssc {

/// Number of semantic categories including the empty label 0.
inline constexpr int kNumLabels = 12;
/// Object categories are 1..kNumObjectClasses.
inline constexpr int kNumObjectClasses = 11;

/// Semantic category of a voxel. Code 0 is free space; 1..11 are the object
/// categories ceiling, floor, wall, window, chair, bed, sofa, table, tvs,
/// furniture, objects.
class SemanticLabel {
 public:
  constexpr SemanticLabel() = default;
  constexpr explicit SemanticLabel(int code) : code_(checked(code)) {}

  static constexpr SemanticLabel empty() { return SemanticLabel{}; }

  constexpr std::uint8_t code() const { return code_; }
  constexpr bool is_empty() const { return code_ == 0; }

  friend constexpr bool operator==(SemanticLabel, SemanticLabel) = default;
  friend constexpr auto operator<=>(SemanticLabel, SemanticLabel) = default;

 private:
  static constexpr std::uint8_t checked(int code) {
    if (code < 0 || code >= kNumLabels) {
      throw std::out_of_range("semantic label code " + std::to_string(code) +
                              " outside 0..11");
    }
    return static_cast<std::uint8_t>(code);
  }

  std::uint8_t code_ = 0;
};

static_assert(sizeof(SemanticLabel) == 1);

/// Lower-case category name ("ceiling", "floor", ...), "empty" for code 0.
std::string_view label_name(SemanticLabel label);

struct VoxelIndex {
  int x = 0;
  int y = 0;
  int z = 0;

  friend constexpr bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

struct GridDims {
  int nx = 0;
  int ny = 0;
  int nz = 0;

  constexpr std::size_t count() const {
    return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny) *
           static_cast<std::size_t>(nz);
  }
  constexpr bool contains(const VoxelIndex& v) const {
    return v.x >= 0 && v.y >= 0 && v.z >= 0 && v.x < nx && v.y < ny && v.z < nz;
  }

  friend constexpr bool operator==(const GridDims&, const GridDims&) = default;
};

/// World anchoring of a dense grid. `origin` is the min-corner of voxel
/// (0,0,0); voxel (i,j,k) covers [origin + (i,j,k)*size, origin + (i+1,j+1,k+1)*size).
struct GridGeometry {
  GridDims dims;
  double voxel_size = 0.0;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();

  /// Throws std::invalid_argument unless dims are positive and the voxel size
  /// is finite and positive.
  void validate() const;

  Eigen::Vector3d extent() const {
    return Eigen::Vector3d(dims.nx, dims.ny, dims.nz) * voxel_size;
  }

  /// Flat offset, x fastest then y then z.
  std::size_t linear(const VoxelIndex& v) const {
    return static_cast<std::size_t>(v.x) +
           static_cast<std::size_t>(dims.nx) *
               (static_cast<std::size_t>(v.y) +
                static_cast<std::size_t>(dims.ny) * static_cast<std::size_t>(v.z));
  }
  VoxelIndex unlinear(std::size_t i) const {
    const auto nx = static_cast<std::size_t>(dims.nx);
    const auto ny = static_cast<std::size_t>(dims.ny);
    return {static_cast<int>(i % nx), static_cast<int>((i / nx) % ny),
            static_cast<int>(i / (nx * ny))};
  }

  friend bool operator==(const GridGeometry& a, const GridGeometry& b) {
    return a.dims == b.dims && a.voxel_size == b.voxel_size && a.origin == b.origin;
  }
};

/// 240 x 144 x 240 voxels of 2 cm covering 4.8 x 2.88 x 4.8 m.
GridGeometry reference_geometry(const Eigen::Vector3d& origin = Eigen::Vector3d::Zero());

/// Voxel containing `point` (floor rule), or nullopt outside the grid.
std::optional<VoxelIndex> world_to_index(const GridGeometry& geometry,
                                         const Eigen::Vector3d& point);

/// Center of voxel `v`. Throws std::out_of_range for indices outside dims.
Eigen::Vector3d index_to_center(const GridGeometry& geometry, const VoxelIndex& v);

/// Dense voxel array anchored in world space.
template <class T>
class VoxelGrid {
 public:
  using value_type = T;

  VoxelGrid() = default;

  explicit VoxelGrid(GridGeometry geometry, T fill = T{})
      : geometry_(std::move(geometry)) {
    geometry_.validate();
    data_.assign(geometry_.dims.count(), fill);
  }

  VoxelGrid(GridGeometry geometry, std::vector<T> data)
      : geometry_(std::move(geometry)), data_(std::move(data)) {
    geometry_.validate();
    if (data_.size() != geometry_.dims.count()) {
      throw std::invalid_argument("voxel data length " + std::to_string(data_.size()) +
                                  " does not match dims (" +
                                  std::to_string(geometry_.dims.count()) + ")");
    }
  }

  const GridGeometry& geometry() const { return geometry_; }
  const GridDims& dims() const { return geometry_.dims; }
  std::size_t size() const { return data_.size(); }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& at(const VoxelIndex& v) { return data_[checked(v)]; }
  const T& at(const VoxelIndex& v) const { return data_[checked(v)]; }

  T& operator()(int x, int y, int z) { return data_[geometry_.linear({x, y, z})]; }
  const T& operator()(int x, int y, int z) const {
    return data_[geometry_.linear({x, y, z})];
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }

  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  friend bool operator==(const VoxelGrid& a, const VoxelGrid& b) {
    return a.geometry_ == b.geometry_ && a.data_ == b.data_;
  }

 private:
  std::size_t checked(const VoxelIndex& v) const {
    if (!geometry_.dims.contains(v)) {
      throw std::out_of_range("voxel index outside grid");
    }
    return geometry_.linear(v);
  }

  GridGeometry geometry_;
  std::vector<T> data_;
};

using LabelGrid = VoxelGrid<SemanticLabel>;

/// Participation mask; nonzero = voxel takes part in a computation.
using VoxelMask = VoxelGrid<std::uint8_t>;

/// Throws std::invalid_argument when the two geometries differ.
void require_same_geometry(const GridGeometry& a, const GridGeometry& b,
                           std::string_view what);

/// Mask that is true exactly where the label is empty.
VoxelMask free_space_mask(const LabelGrid& labels);

/// Majority label over each factor^3 block, ties to the lowest code.
/// Throws std::invalid_argument if a dimension is not divisible by `factor`.
LabelGrid downsample_labels(const LabelGrid& labels, int factor);

/// Per-label voxel counts, indexed by code.
std::array<std::size_t, kNumLabels> label_histogram(const LabelGrid& labels);

}  // namespace ssc
