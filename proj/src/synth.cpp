#include "ssc/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace ssc::synth {

Primitive Primitive::strip(VoxelIndex start, Axis axis, int length, SemanticLabel label) {
  VoxelIndex size{1, 1, 1};
  switch (axis) {
    case Axis::kX:
      size.x = length;
      break;
    case Axis::kY:
      size.y = length;
      break;
    case Axis::kZ:
      size.z = length;
      break;
  }
  return {start, size, label};
}

LabelGrid rasterize(const SceneSpec& spec) {
  LabelGrid grid(spec.geometry);
  const GridDims& d = spec.geometry.dims;
  for (std::size_t k = 0; k < spec.primitives.size(); ++k) {
    const Primitive& p = spec.primitives[k];
    const VoxelIndex last{p.min.x + p.size.x - 1, p.min.y + p.size.y - 1,
                          p.min.z + p.size.z - 1};
    if (p.size.x <= 0 || p.size.y <= 0 || p.size.z <= 0 || !d.contains(p.min) ||
        !d.contains(last)) {
      throw std::invalid_argument("primitive " + std::to_string(k) + " lies outside the grid");
    }
    for (int z = p.min.z; z <= last.z; ++z) {
      for (int y = p.min.y; y <= last.y; ++y) {
        for (int x = p.min.x; x <= last.x; ++x) grid(x, y, z) = p.label;
      }
    }
  }
  return grid;
}

SceneSpec random_scene(const GridGeometry& geometry, std::uint64_t seed, int primitives) {
  std::mt19937_64 rng(seed);
  const GridDims& d = geometry.dims;
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  SceneSpec spec{geometry, {}};
  for (int k = 0; k < primitives; ++k) {
    const SemanticLabel label(uniform(1, kNumObjectClasses));
    const VoxelIndex min{uniform(0, d.nx - 1), uniform(0, d.ny - 1), uniform(0, d.nz - 1)};
    if (uniform(0, 3) == 0) {
      const auto axis = static_cast<Axis>(uniform(0, 2));
      const int room = axis == Axis::kX ? d.nx - min.x : axis == Axis::kY ? d.ny - min.y
                                                                           : d.nz - min.z;
      spec.primitives.push_back(Primitive::strip(min, axis, uniform(1, room), label));
    } else {
      const VoxelIndex size{uniform(1, d.nx - min.x), uniform(1, d.ny - min.y),
                            uniform(1, d.nz - min.z)};
      spec.primitives.push_back(Primitive::box(min, size, label));
    }
  }
  return spec;
}

LabelGrid random_labels(const GridGeometry& geometry, std::uint64_t seed, int labels,
                        double empty_fraction) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution empty(empty_fraction);
  std::uniform_int_distribution<int> code(labels > 1 ? 1 : 0, labels - 1);
  LabelGrid grid(geometry);
  for (auto& l : grid) l = empty(rng) ? SemanticLabel::empty() : SemanticLabel(code(rng));
  return grid;
}

VoxelMask random_mask(const GridGeometry& geometry, std::uint64_t seed, double keep) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution bit(keep);
  VoxelMask mask(geometry);
  for (auto& m : mask) m = bit(rng) ? 1 : 0;
  return mask;
}

LgaGrid oracle_lga(const LabelGrid& labels, const VoxelMask& free_space) {
  const int nx = labels.dims().nx;
  const int ny = labels.dims().ny;
  const int nz = labels.dims().nz;
  const int offsets[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  LgaGrid out(labels.geometry(), 255);
  for (int z = 0; z < nz; ++z) {
    for (int y = 0; y < ny; ++y) {
      for (int x = 0; x < nx; ++x) {
        if (free_space(x, y, z) != 0) continue;
        const int own = labels(x, y, z).code();
        int differing = 0;
        for (const auto& o : offsets) {
          const int qx = x + o[0];
          const int qy = y + o[1];
          const int qz = z + o[2];
          const bool inside = qx >= 0 && qx < nx && qy >= 0 && qy < ny && qz >= 0 && qz < nz;
          if (!inside) continue;
          if ((own ^ labels(qx, qy, qz).code()) != 0) differing += 1;
        }
        out(x, y, z) = static_cast<std::uint8_t>(differing);
      }
    }
  }
  return out;
}

OracleConfusion oracle_confusion(const LabelGrid& pred, const LabelGrid& gt,
                                 const VoxelMask& mask) {
  OracleConfusion c;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (mask[i] == 0) continue;
    const int p = pred[i].code();
    const int g = gt[i].code();
    for (int k = 0; k < kNumLabels; ++k) {
      if (p == k && g == k) c.tp[k] += 1;
      if (p == k && g != k) c.fp[k] += 1;
      if (p != k && g == k) c.fn[k] += 1;
    }
    if (p != 0 && g != 0) c.occupied_tp += 1;
    if (p != 0 && g == 0) c.occupied_fp += 1;
    if (p == 0 && g != 0) c.occupied_fn += 1;
  }
  return c;
}

double oracle_loss(OracleLoss loss, const LossInstance& probs, const OracleParams& params) {
  const int n_vox = probs.voxels;
  const int n_cls = probs.classes;
  auto y = [&](int n, int c) { return probs.targets[n] == c ? 1.0 : 0.0; };
  auto yhat = [&](int n, int c) { return probs.scores[n * n_cls + c]; };
  auto used = [&](int n) { return probs.mask.empty() || probs.mask[n] != 0; };

  if (loss == OracleLoss::kDice) {
    double total = 0.0;
    for (int c = 0; c < n_cls; ++c) {
      double num = 0.0;
      double y2 = 0.0;
      double p2 = 0.0;
      for (int n = 0; n < n_vox; ++n) {
        if (!used(n)) continue;
        num += y(n, c) * yhat(n, c);
        y2 += y(n, c) * y(n, c);
        p2 += yhat(n, c) * yhat(n, c);
      }
      total += 1.0 - 2.0 * num / (y2 + p2 + params.epsilon);
    }
    return total;
  }

  double total = 0.0;
  int count = 0;
  for (int n = 0; n < n_vox; ++n) {
    if (!used(n)) continue;
    ++count;
    for (int c = 0; c < n_cls; ++c) {
      const double log_p = std::log(std::max(yhat(n, c), params.epsilon));
      double factor = 1.0;
      switch (loss) {
        case OracleLoss::kPositionAware:
          factor = params.importance[n];
          break;
        case OracleLoss::kWeightedCrossEntropy:
          factor = params.weights[c];
          break;
        case OracleLoss::kFocal:
          factor = std::pow(1.0 - yhat(n, c), params.gamma);
          break;
        case OracleLoss::kDice:
          break;
      }
      total += factor * y(n, c) * log_p;
    }
  }
  return -total / count;
}

std::vector<double> oracle_softmax(const LossInstance& logits) {
  std::vector<double> out(logits.scores.size());
  for (int n = 0; n < logits.voxels; ++n) {
    double top = logits.scores[n * logits.classes];
    for (int c = 1; c < logits.classes; ++c) top = std::max(top, logits.scores[n * logits.classes + c]);
    double z = 0.0;
    for (int c = 0; c < logits.classes; ++c) z += std::exp(logits.scores[n * logits.classes + c] - top);
    for (int c = 0; c < logits.classes; ++c) {
      out[n * logits.classes + c] = std::exp(logits.scores[n * logits.classes + c] - top) / z;
    }
  }
  return out;
}

LossInstance random_logits(std::uint64_t seed, int voxels, int classes, double scale,
                           bool with_mask) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> logit(0.0, scale);
  std::uniform_int_distribution<int> target(0, classes - 1);
  LossInstance inst{voxels, classes, {}, {}, {}};
  inst.scores.resize(static_cast<std::size_t>(voxels) * classes);
  for (auto& s : inst.scores) s = logit(rng);
  inst.targets.resize(static_cast<std::size_t>(voxels));
  for (auto& t : inst.targets) t = target(rng);
  if (with_mask) {
    std::bernoulli_distribution keep(0.75);
    inst.mask.resize(static_cast<std::size_t>(voxels));
    for (auto& m : inst.mask) m = keep(rng) ? 1 : 0;
    inst.mask[0] = 1;
  }
  return inst;
}

}  // namespace ssc::synth
