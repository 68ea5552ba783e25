#include "ssc/tsdf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ssc/error.hpp"

namespace ssc {

TsdfGrid compute_tsdf(const DepthMap& depth, const CameraIntrinsics& intr,
                      const CameraPose& pose, const GridGeometry& geometry,
                      double truncation) {
  if (!(truncation > 0.0) || !std::isfinite(truncation)) {
    throw std::invalid_argument("truncation must be positive");
  }
  intr.validate();
  TsdfGrid tsdf(geometry, 1.0F);
  const GridDims& dims = geometry.dims;
  for (int z = 0; z < dims.nz; ++z) {
    for (int y = 0; y < dims.ny; ++y) {
      for (int x = 0; x < dims.nx; ++x) {
        const auto hit = project_to_pixel(index_to_center(geometry, {x, y, z}), intr, pose,
                                          depth.width(), depth.height());
        if (!hit) continue;
        const double observed = depth.at(hit->u, hit->v);
        if (observed <= 0.0) continue;
        const double sdf = (observed - hit->z) / truncation;
        tsdf(x, y, z) = static_cast<float>(std::clamp(sdf, -1.0, 1.0));
      }
    }
  }
  return tsdf;
}

float flip_tsdf_value(float t) {
  const float magnitude = 1.0F - std::fabs(t);
  return t < 0.0F ? -magnitude : magnitude;
}

FlippedTsdfGrid flip_tsdf(const TsdfGrid& tsdf) {
  FlippedTsdfGrid out(tsdf.geometry());
  for (std::size_t i = 0; i < tsdf.size(); ++i) {
    const float t = tsdf[i];
    if (!(t >= -1.0F && t <= 1.0F)) {
      throw DomainError("TSDF value " + std::to_string(t) + " at voxel " + std::to_string(i) +
                        " outside [-1, 1]");
    }
    out[i] = flip_tsdf_value(t);
  }
  return out;
}

}  // namespace ssc
