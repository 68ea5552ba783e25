#include "ssc/camera.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/LU>

namespace ssc {

DepthMap::DepthMap(int width, int height, std::vector<double> depth)
    : width_(width), height_(height), depth_(std::move(depth)) {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("depth map dimensions must be positive");
  }
  if (depth_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("depth payload has " + std::to_string(depth_.size()) +
                                " samples, expected " +
                                std::to_string(static_cast<std::size_t>(width) *
                                               static_cast<std::size_t>(height)));
  }
  for (const double d : depth_) {
    if (!std::isfinite(d) || d < 0.0) {
      throw std::invalid_argument("depth values must be finite and non-negative");
    }
  }
}

DepthMap::DepthMap(int width, int height, double fill)
    : DepthMap(width, height,
               std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                       static_cast<std::size_t>(std::max(height, 0)),
                                   fill)) {}

void DepthMap::set(int u, int v, double d) {
  if (!std::isfinite(d) || d < 0.0) {
    throw std::invalid_argument("depth values must be finite and non-negative");
  }
  depth_[index(u, v)] = d;
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy) ||
      !std::isfinite(cx) || !std::isfinite(cy)) {
    throw std::invalid_argument("camera intrinsics require finite fx > 0 and fy > 0");
  }
}

CameraPose::CameraPose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  const double orth = (rotation * rotation.transpose() - Eigen::Matrix3d::Identity())
                          .cwiseAbs()
                          .maxCoeff();
  if (!(orth <= 1e-6)) {
    throw std::invalid_argument("camera rotation is not orthonormal (max |R R^T - I| = " +
                                std::to_string(orth) + ")");
  }
  if (!(rotation.determinant() > 0.0)) {
    throw std::invalid_argument("camera rotation must have determinant +1");
  }
  if (!translation.allFinite()) {
    throw std::invalid_argument("camera translation must be finite");
  }
}

std::optional<PixelHit> project_to_pixel(const Eigen::Vector3d& world_point,
                                         const CameraIntrinsics& intr,
                                         const CameraPose& pose, int width, int height) {
  const Eigen::Vector3d p = pose.to_camera(world_point);
  if (!(p.z() > 0.0)) return std::nullopt;
  const double u = std::round(intr.fx * p.x() / p.z() + intr.cx);
  const double v = std::round(intr.fy * p.y() / p.z() + intr.cy);
  if (!(u >= 0.0 && v >= 0.0 && u < width && v < height)) return std::nullopt;
  return PixelHit{static_cast<int>(u), static_cast<int>(v), p.z()};
}

std::vector<Eigen::Vector3d> backproject(const DepthMap& depth, const CameraIntrinsics& intr,
                                         const CameraPose& pose) {
  std::vector<Eigen::Vector3d> points;
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const double d = depth.at(u, v);
      if (d > 0.0) points.push_back(pose.to_world(pixel_ray_point(intr, u, v, d)));
    }
  }
  return points;
}

void ProjectionMap::set(std::size_t pixel, std::optional<VoxelIndex> voxel) {
  if (voxel && !dims_.contains(*voxel)) {
    throw std::out_of_range("projection entry outside target grid");
  }
  entries_.at(pixel) = voxel;
}

std::size_t ProjectionMap::mapped_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries_.begin(), entries_.end(), [](const auto& e) { return e.has_value(); }));
}

ProjectionMap compute_projection_map(const DepthMap& depth, const CameraIntrinsics& intr,
                                     const CameraPose& pose, const GridGeometry& geometry) {
  intr.validate();
  geometry.validate();
  ProjectionMap map(depth.width(), depth.height(), geometry.dims);
  for (int v = 0; v < depth.height(); ++v) {
    for (int u = 0; u < depth.width(); ++u) {
      const double d = depth.at(u, v);
      if (d <= 0.0) continue;
      map.set(depth.index(u, v),
              world_to_index(geometry, pose.to_world(pixel_ray_point(intr, u, v, d))));
    }
  }
  return map;
}

FeatureVolume scatter_to_volume(const FeatureImage& features, const ProjectionMap& map,
                                const GridGeometry& geometry) {
  if (features.width() != map.width() || features.height() != map.height()) {
    throw std::invalid_argument("feature image " + std::to_string(features.width()) + "x" +
                                std::to_string(features.height()) +
                                " does not match projection map " +
                                std::to_string(map.width()) + "x" +
                                std::to_string(map.height()));
  }
  if (!(map.dims() == geometry.dims)) {
    throw std::invalid_argument("projection map was built for different grid dims");
  }
  const auto channels = static_cast<std::size_t>(features.channels());
  FeatureVolume out{geometry, features.channels(),
                    std::vector<double>(geometry.dims.count() * channels, 0.0),
                    VoxelMask(geometry)};
  for (std::size_t p = 0; p < map.size(); ++p) {
    const auto& voxel = map[p];
    if (!voxel) continue;
    const std::size_t i = geometry.linear(*voxel);
    double* dst = out.data.data() + i * channels;
    const double* src = features.pixel(p);
    if (!out.touched[i]) {
      std::copy(src, src + channels, dst);
      out.touched[i] = 1;
    } else {
      for (std::size_t c = 0; c < channels; ++c) dst[c] = std::max(dst[c], src[c]);
    }
  }
  return out;
}

}  // namespace ssc
