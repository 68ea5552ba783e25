#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ssc/camera.hpp"
#include "ssc/grid.hpp"

namespace ssc {

/// Axis-aligned box in world coordinates, meters. Bounds are inclusive.
struct RoomBounds {
  Eigen::Vector3d min = Eigen::Vector3d::Constant(-std::numeric_limits<double>::infinity());
  Eigen::Vector3d max = Eigen::Vector3d::Constant(std::numeric_limits<double>::infinity());

  static RoomBounds of(const GridGeometry& geometry) {
    return {geometry.origin, geometry.origin + geometry.extent()};
  }
  bool contains(const Eigen::Vector3d& p) const {
    return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
  }
};

/// Voxels that count towards evaluation: inside the camera frustum and the room.
using EvalMask = VoxelMask;

/// True where the voxel center projects into the image with positive depth
/// and lies within `room`.
EvalMask build_eval_mask(const DepthMap& depth, const CameraIntrinsics& intr,
                         const CameraPose& pose, const GridGeometry& geometry,
                         const RoomBounds& room);

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  ConfusionCounts& operator+=(const ConfusionCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;

  /// nullopt when the denominator is zero.
  std::optional<double> precision() const;
  std::optional<double> recall() const;
  std::optional<double> iou() const;
};

struct ScMetrics {
  ConfusionCounts counts;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> iou;

  static ScMetrics from_counts(const ConfusionCounts& counts);
};

struct MetricsReport {
  ScMetrics sc;
  /// Indexed by label code; entry 0 (empty) is unused.
  std::array<ConfusionCounts, kNumLabels> class_counts{};
  std::array<std::optional<double>, kNumLabels> class_iou{};
  /// Mean over object classes with a defined IoU; nullopt if none is defined.
  std::optional<double> mean_iou;
  /// Object classes left out of the mean because TP + FP + FN = 0.
  std::vector<int> excluded_classes;

  static MetricsReport from_counts(const ConfusionCounts& sc_counts,
                                   const std::array<ConfusionCounts, kNumLabels>& class_counts);
};

/// Occupied (label != 0) vs empty over masked voxels.
ScMetrics sc_metrics(const LabelGrid& pred, const LabelGrid& gt, const EvalMask& mask);

/// Per-class IoU over the 11 object classes plus the scene-completion block.
MetricsReport ssc_metrics(const LabelGrid& pred, const LabelGrid& gt, const EvalMask& mask);

enum class Averaging {
  /// Sum counts over scenes, then compute each ratio once.
  kMicro,
  /// Average per-scene ratios over the scenes where they are defined.
  kMacro,
};

/// Dataset-level aggregation over several scenes.
class MetricsAccumulator {
 public:
  void add(const LabelGrid& pred, const LabelGrid& gt, const EvalMask& mask);
  void add(const MetricsReport& scene);

  std::size_t scenes() const { return scenes_.size(); }
  MetricsReport report(Averaging averaging = Averaging::kMicro) const;

 private:
  std::vector<MetricsReport> scenes_;
};

}  // namespace ssc
