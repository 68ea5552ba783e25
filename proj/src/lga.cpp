#include "ssc/lga.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "ssc/error.hpp"

namespace ssc {

LgaGrid compute_lga(const LabelGrid& labels, const VoxelMask& free_space) {
  require_same_geometry(labels.geometry(), free_space.geometry(), "compute_lga");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if ((free_space[i] != 0) != labels[i].is_empty()) {
      throw std::invalid_argument("compute_lga: free-space mask disagrees with labels at voxel " +
                                  std::to_string(i));
    }
  }

  const GridDims& d = labels.dims();
  const std::size_t sx = 1;
  const std::size_t sy = static_cast<std::size_t>(d.nx);
  const std::size_t sz = sy * static_cast<std::size_t>(d.ny);

  LgaGrid lga(labels.geometry(), kLgaUndefined);
  const SemanticLabel* in = labels.values().data();
  std::uint8_t* out = lga.values().data();

  std::size_t i = 0;
  for (int z = 0; z < d.nz; ++z) {
    for (int y = 0; y < d.ny; ++y) {
      for (int x = 0; x < d.nx; ++x, ++i) {
        const SemanticLabel c = in[i];
        if (c.is_empty()) continue;
        int m = 0;
        if (x > 0) m += in[i - sx] != c;
        if (x + 1 < d.nx) m += in[i + sx] != c;
        if (y > 0) m += in[i - sy] != c;
        if (y + 1 < d.ny) m += in[i + sy] != c;
        if (z > 0) m += in[i - sz] != c;
        if (z + 1 < d.nz) m += in[i + sz] != c;
        out[i] = static_cast<std::uint8_t>(m);
      }
    }
  }
  return lga;
}

LgaGrid compute_lga(const LabelGrid& labels) {
  return compute_lga(labels, free_space_mask(labels));
}

ImportanceGrid importance_grid(const LgaGrid& lga, double lambda, double alpha) {
  if (!(lambda >= 0.0) || !(alpha >= 0.0) || !std::isfinite(lambda) || !std::isfinite(alpha)) {
    throw DomainError("importance parameters must be finite and non-negative (lambda=" +
                      std::to_string(lambda) + ", alpha=" + std::to_string(alpha) + ")");
  }
  std::array<double, kLgaNeighbors + 1> table{};
  for (int k = 0; k <= kLgaNeighbors; ++k) table[k] = lambda + alpha * k;

  ImportanceGrid out(lga.geometry(), lambda);
  for (std::size_t i = 0; i < lga.size(); ++i) {
    const std::uint8_t m = lga[i];
    if (m == kLgaUndefined) continue;
    if (m > kLgaNeighbors) {
      throw std::invalid_argument("LGA value " + std::to_string(m) + " outside 0..6");
    }
    out[i] = table[m];
  }
  return out;
}

std::size_t LgaHistogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::size_t{0});
}

LgaHistogram lga_histogram(const LgaGrid& lga) {
  LgaHistogram h;
  for (const std::uint8_t m : lga) {
    if (m == kLgaUndefined) continue;
    if (m > kLgaNeighbors) {
      throw std::invalid_argument("LGA value " + std::to_string(m) + " outside 0..6");
    }
    ++h.counts[m];
  }
  const std::size_t total = h.total();
  if (total == 0) throw DomainError("no defined voxels");
  for (int k = 0; k <= kLgaNeighbors; ++k) {
    h.fractions[k] = static_cast<double>(h.counts[k]) / static_cast<double>(total);
  }
  return h;
}

}  // namespace ssc
