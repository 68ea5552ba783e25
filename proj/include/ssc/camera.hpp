#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ssc/grid.hpp"

namespace ssc {

/// Single-view depth raster in meters, row-major. 0 marks a missing sample.
class DepthMap {
 public:
  DepthMap() = default;
  DepthMap(int width, int height, std::vector<double> depth);
  DepthMap(int width, int height, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return depth_.size(); }

  double at(int u, int v) const { return depth_[index(u, v)]; }
  void set(int u, int v, double d);
  bool valid(int u, int v) const { return at(u, v) > 0.0; }

  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }
  const std::vector<double>& values() const { return depth_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> depth_;
};

struct CameraIntrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  void validate() const;
};

/// Rigid camera-to-world transform.
class CameraPose {
 public:
  CameraPose() = default;
  /// Throws std::invalid_argument unless `rotation` is orthonormal within 1e-6
  /// with determinant +1.
  CameraPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static CameraPose identity() { return {}; }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Vector3d to_world(const Eigen::Vector3d& camera_point) const {
    return rotation_ * camera_point + translation_;
  }
  Eigen::Vector3d to_camera(const Eigen::Vector3d& world_point) const {
    return rotation_.transpose() * (world_point - translation_);
  }

 private:
  Eigen::Matrix3d rotation_ = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation_ = Eigen::Vector3d::Zero();
};

struct PixelHit {
  int u = 0;
  int v = 0;
  /// Camera-space depth of the projected point.
  double z = 0.0;
};

/// Projects a world point through the pinhole model. The point lands on the
/// pixel whose integer index is nearest to (fx*x/z + cx, fy*y/z + cy). Returns
/// nullopt for points with z <= 0 or outside the image.
std::optional<PixelHit> project_to_pixel(const Eigen::Vector3d& world_point,
                                         const CameraIntrinsics& intr,
                                         const CameraPose& pose, int width, int height);

/// Camera-space point seen at pixel (u, v) with depth d.
inline Eigen::Vector3d pixel_ray_point(const CameraIntrinsics& intr, double u, double v,
                                       double d) {
  return {d * (u - intr.cx) / intr.fx, d * (v - intr.cy) / intr.fy, d};
}

/// World points of all valid pixels, in row-major pixel order.
std::vector<Eigen::Vector3d> backproject(const DepthMap& depth, const CameraIntrinsics& intr,
                                         const CameraPose& pose);

/// Per-pixel voxel correspondence (the 2D-to-3D mapping index).
class ProjectionMap {
 public:
  ProjectionMap(int width, int height, GridDims dims)
      : width_(width), height_(height), dims_(dims),
        entries_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {}

  int width() const { return width_; }
  int height() const { return height_; }
  const GridDims& dims() const { return dims_; }
  std::size_t size() const { return entries_.size(); }

  const std::optional<VoxelIndex>& at(int u, int v) const {
    return entries_[static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
                    static_cast<std::size_t>(u)];
  }
  const std::optional<VoxelIndex>& operator[](std::size_t pixel) const {
    return entries_[pixel];
  }
  /// Throws std::out_of_range if `voxel` lies outside dims.
  void set(std::size_t pixel, std::optional<VoxelIndex> voxel);

  std::size_t mapped_count() const;

 private:
  int width_;
  int height_;
  GridDims dims_;
  std::vector<std::optional<VoxelIndex>> entries_;
};

ProjectionMap compute_projection_map(const DepthMap& depth, const CameraIntrinsics& intr,
                                     const CameraPose& pose, const GridGeometry& geometry);

/// Per-pixel feature vectors of a fixed dimension, row-major pixels.
class FeatureImage {
 public:
  FeatureImage(int width, int height, int channels)
      : width_(width), height_(height), channels_(channels),
        data_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                  static_cast<std::size_t>(channels),
              0.0) {}

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }

  double* pixel(std::size_t p) { return data_.data() + p * static_cast<std::size_t>(channels_); }
  const double* pixel(std::size_t p) const {
    return data_.data() + p * static_cast<std::size_t>(channels_);
  }
  double& operator()(int u, int v, int c) {
    return data_[(static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
                  static_cast<std::size_t>(u)) *
                     static_cast<std::size_t>(channels_) +
                 static_cast<std::size_t>(c)];
  }

 private:
  int width_;
  int height_;
  int channels_;
  std::vector<double> data_;
};

/// Dense grid of F-vectors, voxel-major (all channels of voxel 0, then voxel 1, ...).
struct FeatureVolume {
  GridGeometry geometry;
  int channels = 0;
  std::vector<double> data;
  VoxelMask touched;

  std::span<const double> voxel(std::size_t i) const {
    return std::span<const double>(data).subspan(i * static_cast<std::size_t>(channels),
                                                 static_cast<std::size_t>(channels));
  }
};

/// Lifts per-pixel features into the grid; voxels hit by several pixels keep
/// the element-wise maximum. Throws std::invalid_argument when the feature
/// image and the map disagree in size or the map was built for other dims.
FeatureVolume scatter_to_volume(const FeatureImage& features, const ProjectionMap& map,
                                const GridGeometry& geometry);

}  // namespace ssc
