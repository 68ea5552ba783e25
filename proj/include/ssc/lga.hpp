#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "ssc/grid.hpp"

namespace ssc {

/// Face-adjacent neighbourhood size.
inline constexpr int kLgaNeighbors = 6;
/// Marker for voxels without an anisotropy value (free space).
inline constexpr std::uint8_t kLgaUndefined = 255;

inline constexpr double kDefaultLambda = 1.0;
inline constexpr double kDefaultAlpha = 0.5;

/// Per-voxel local geometric anisotropy in 0..6, kLgaUndefined on free space.
using LgaGrid = VoxelGrid<std::uint8_t>;

/// Per-voxel loss weight lambda + alpha * LGA.
using ImportanceGrid = VoxelGrid<double>;

/// Counts the face neighbours of every occupied voxel whose label differs from
/// its own. An empty neighbour counts as different; a neighbour outside the
/// volume counts as identical. `free_space` must match the empty labels
/// exactly; otherwise std::invalid_argument is thrown.
LgaGrid compute_lga(const LabelGrid& labels, const VoxelMask& free_space);

/// Same, with the free-space mask derived from the labels.
LgaGrid compute_lga(const LabelGrid& labels);

/// Undefined voxels receive exactly `lambda`. Throws DomainError for negative
/// or non-finite parameters.
ImportanceGrid importance_grid(const LgaGrid& lga, double lambda = kDefaultLambda,
                               double alpha = kDefaultAlpha);

struct LgaHistogram {
  std::array<std::size_t, kLgaNeighbors + 1> counts{};
  std::array<double, kLgaNeighbors + 1> fractions{};

  std::size_t total() const;
};

/// Histogram over defined voxels. Throws DomainError("no defined voxels") when
/// every voxel is undefined, std::invalid_argument on a value above 6 that is
/// not the undefined marker.
LgaHistogram lga_histogram(const LgaGrid& lga);

}  // namespace ssc
