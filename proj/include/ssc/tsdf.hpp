#pragma once

#include "ssc/camera.hpp"
#include "ssc/grid.hpp"

namespace ssc {

/// Truncation band used for the reference volume, meters.
inline constexpr double kDefaultTruncation = 0.24;

/// Truncation-normalized signed distance in [-1, 1]. Positive values lie
/// between the camera and the observed surface, negative values behind it.
using TsdfGrid = VoxelGrid<float>;

/// Flipped TSDF: sign(t) * (1 - |t|), so the surface carries magnitude 1.
using FlippedTsdfGrid = VoxelGrid<float>;

/// Projective (along the viewing ray) TSDF of a single depth view. Voxels that
/// project outside the image, lie behind the camera or land on a missing depth
/// sample are set to +1.
TsdfGrid compute_tsdf(const DepthMap& depth, const CameraIntrinsics& intr,
                      const CameraPose& pose, const GridGeometry& geometry,
                      double truncation = kDefaultTruncation);

/// Scalar flip with sign(0) = +1.
float flip_tsdf_value(float t);

/// Throws DomainError if any value lies outside [-1, 1] or is not finite.
FlippedTsdfGrid flip_tsdf(const TsdfGrid& tsdf);

}  // namespace ssc
