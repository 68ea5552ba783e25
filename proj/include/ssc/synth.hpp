#pragma once

// Synthetic scenes and deliberately naive reference implementations used to
// cross-check the library. Nothing here shares computational code with the
// modules it checks.

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "ssc/grid.hpp"
#include "ssc/lga.hpp"
#include "ssc/metrics.hpp"

namespace ssc::synth {

enum class Axis { kX, kY, kZ };

/// Axis-aligned block of voxels painted with one label.
struct Primitive {
  VoxelIndex min;
  VoxelIndex size;
  SemanticLabel label;

  static Primitive box(VoxelIndex min, VoxelIndex size, SemanticLabel label) {
    return {min, size, label};
  }
  /// One voxel wide line of `length` voxels along `axis`.
  static Primitive strip(VoxelIndex start, Axis axis, int length, SemanticLabel label);
};

struct SceneSpec {
  GridGeometry geometry;
  std::vector<Primitive> primitives;  // painted in order, later ones win
};

/// Throws std::invalid_argument if a primitive leaves the grid or has a
/// non-positive size.
LabelGrid rasterize(const SceneSpec& spec);

/// Random boxes and strips; identical seeds give identical specs.
SceneSpec random_scene(const GridGeometry& geometry, std::uint64_t seed, int primitives);

/// Every voxel drawn independently from 0..labels-1 with `empty_fraction`
/// probability mass moved onto label 0.
LabelGrid random_labels(const GridGeometry& geometry, std::uint64_t seed, int labels = kNumLabels,
                        double empty_fraction = 0.3);

VoxelMask random_mask(const GridGeometry& geometry, std::uint64_t seed, double keep = 0.7);

/// Nested-loop neighbour scan.
LgaGrid oracle_lga(const LabelGrid& labels, const VoxelMask& free_space);

struct OracleConfusion {
  /// Indexed by label code.
  std::array<std::uint64_t, kNumLabels> tp{};
  std::array<std::uint64_t, kNumLabels> fp{};
  std::array<std::uint64_t, kNumLabels> fn{};
  std::uint64_t occupied_tp = 0;
  std::uint64_t occupied_fp = 0;
  std::uint64_t occupied_fn = 0;
};

OracleConfusion oracle_confusion(const LabelGrid& pred, const LabelGrid& gt,
                                 const VoxelMask& mask);

/// Row-major N x C scores and integer targets for the scalar loss oracles.
struct LossInstance {
  int voxels = 0;
  int classes = 0;
  std::vector<double> scores;
  std::vector<int> targets;
  std::vector<std::uint8_t> mask;  // empty = all voxels participate
};

enum class OracleLoss { kPositionAware, kWeightedCrossEntropy, kFocal, kDice };

struct OracleParams {
  std::vector<double> importance;  // per voxel
  std::vector<double> weights;     // per class
  double gamma = 2.0;
  double epsilon = 1e-12;
};

/// Evaluates the printed loss formula term by term on probabilities.
double oracle_loss(OracleLoss loss, const LossInstance& probs, const OracleParams& params);

/// Plain softmax, one voxel at a time.
std::vector<double> oracle_softmax(const LossInstance& logits);

/// Random logits ~ N(0, scale^2), random targets and optional random mask.
LossInstance random_logits(std::uint64_t seed, int voxels, int classes, double scale = 2.0,
                           bool with_mask = false);

}  // namespace ssc::synth
