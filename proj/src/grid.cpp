#include "ssc/grid.hpp"

#include <algorithm>

namespace ssc {

namespace {

constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "empty", "ceiling", "floor", "wall", "window", "chair",
    "bed",   "sofa",    "table", "tvs",  "furniture", "objects"};

}  // namespace

std::string_view label_name(SemanticLabel label) { return kLabelNames[label.code()]; }

void GridGeometry::validate() const {
  if (dims.nx <= 0 || dims.ny <= 0 || dims.nz <= 0) {
    throw std::invalid_argument("grid dims must be positive, got (" +
                                std::to_string(dims.nx) + ", " + std::to_string(dims.ny) +
                                ", " + std::to_string(dims.nz) + ")");
  }
  if (!std::isfinite(voxel_size) || voxel_size <= 0.0) {
    throw std::invalid_argument("voxel size must be positive");
  }
  if (!origin.allFinite()) {
    throw std::invalid_argument("grid origin must be finite");
  }
}

GridGeometry reference_geometry(const Eigen::Vector3d& origin) {
  return GridGeometry{{240, 144, 240}, 0.02, origin};
}

std::optional<VoxelIndex> world_to_index(const GridGeometry& geometry,
                                         const Eigen::Vector3d& point) {
  const Eigen::Vector3d rel = (point - geometry.origin) / geometry.voxel_size;
  if (!rel.allFinite()) return std::nullopt;
  const Eigen::Vector3d cell = rel.array().floor();
  const GridDims& d = geometry.dims;
  if (cell.x() < 0 || cell.y() < 0 || cell.z() < 0 || cell.x() >= d.nx ||
      cell.y() >= d.ny || cell.z() >= d.nz) {
    return std::nullopt;
  }
  return VoxelIndex{static_cast<int>(cell.x()), static_cast<int>(cell.y()),
                    static_cast<int>(cell.z())};
}

Eigen::Vector3d index_to_center(const GridGeometry& geometry, const VoxelIndex& v) {
  if (!geometry.dims.contains(v)) {
    throw std::out_of_range("voxel (" + std::to_string(v.x) + ", " + std::to_string(v.y) +
                            ", " + std::to_string(v.z) + ") outside grid");
  }
  return geometry.origin +
         (Eigen::Vector3d(v.x, v.y, v.z).array() + 0.5).matrix() * geometry.voxel_size;
}

void require_same_geometry(const GridGeometry& a, const GridGeometry& b,
                           std::string_view what) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(what) + ": grid geometries differ");
  }
}

VoxelMask free_space_mask(const LabelGrid& labels) {
  VoxelMask mask(labels.geometry());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    mask[i] = labels[i].is_empty() ? 1 : 0;
  }
  return mask;
}

LabelGrid downsample_labels(const LabelGrid& labels, int factor) {
  if (factor <= 0) throw std::invalid_argument("downsample factor must be positive");
  const GridDims& in = labels.dims();
  if (in.nx % factor != 0 || in.ny % factor != 0 || in.nz % factor != 0) {
    throw std::invalid_argument("grid dims not divisible by downsample factor " +
                                std::to_string(factor));
  }
  GridGeometry out_geometry{{in.nx / factor, in.ny / factor, in.nz / factor},
                            labels.geometry().voxel_size * factor,
                            labels.geometry().origin};
  LabelGrid out(out_geometry);

  std::array<int, kNumLabels> votes{};
  for (int z = 0; z < out_geometry.dims.nz; ++z) {
    for (int y = 0; y < out_geometry.dims.ny; ++y) {
      for (int x = 0; x < out_geometry.dims.nx; ++x) {
        votes.fill(0);
        for (int dz = 0; dz < factor; ++dz) {
          for (int dy = 0; dy < factor; ++dy) {
            for (int dx = 0; dx < factor; ++dx) {
              ++votes[labels(x * factor + dx, y * factor + dy, z * factor + dz).code()];
            }
          }
        }
        // max_element returns the first maximum, i.e. the lowest code on ties.
        const auto winner = std::max_element(votes.begin(), votes.end()) - votes.begin();
        out(x, y, z) = SemanticLabel(static_cast<int>(winner));
      }
    }
  }
  return out;
}

std::array<std::size_t, kNumLabels> label_histogram(const LabelGrid& labels) {
  std::array<std::size_t, kNumLabels> counts{};
  for (const SemanticLabel l : labels) ++counts[l.code()];
  return counts;
}

}  // namespace ssc
