#include "ssc/metrics.hpp"

#include <stdexcept>

namespace ssc {

namespace {

std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

void require_mask(const LabelGrid& pred, const LabelGrid& gt, const EvalMask& mask) {
  require_same_geometry(pred.geometry(), gt.geometry(), "metrics: prediction vs ground truth");
  require_same_geometry(gt.geometry(), mask.geometry(), "metrics: ground truth vs mask");
}

}  // namespace

EvalMask build_eval_mask(const DepthMap& depth, const CameraIntrinsics& intr,
                         const CameraPose& pose, const GridGeometry& geometry,
                         const RoomBounds& room) {
  intr.validate();
  EvalMask mask(geometry);
  const GridDims& d = geometry.dims;
  std::size_t i = 0;
  for (int z = 0; z < d.nz; ++z) {
    for (int y = 0; y < d.ny; ++y) {
      for (int x = 0; x < d.nx; ++x, ++i) {
        const Eigen::Vector3d center = index_to_center(geometry, {x, y, z});
        if (!room.contains(center)) continue;
        if (project_to_pixel(center, intr, pose, depth.width(), depth.height())) mask[i] = 1;
      }
    }
  }
  return mask;
}

std::optional<double> ConfusionCounts::precision() const { return ratio(tp, tp + fp); }
std::optional<double> ConfusionCounts::recall() const { return ratio(tp, tp + fn); }
std::optional<double> ConfusionCounts::iou() const { return ratio(tp, tp + fp + fn); }

ScMetrics ScMetrics::from_counts(const ConfusionCounts& counts) {
  return {counts, counts.precision(), counts.recall(), counts.iou()};
}

MetricsReport MetricsReport::from_counts(
    const ConfusionCounts& sc_counts,
    const std::array<ConfusionCounts, kNumLabels>& class_counts) {
  MetricsReport r;
  r.sc = ScMetrics::from_counts(sc_counts);
  r.class_counts = class_counts;
  double sum = 0.0;
  int defined = 0;
  for (int c = 1; c <= kNumObjectClasses; ++c) {
    r.class_iou[c] = class_counts[c].iou();
    if (r.class_iou[c]) {
      sum += *r.class_iou[c];
      ++defined;
    } else {
      r.excluded_classes.push_back(c);
    }
  }
  if (defined > 0) r.mean_iou = sum / defined;
  return r;
}

ScMetrics sc_metrics(const LabelGrid& pred, const LabelGrid& gt, const EvalMask& mask) {
  require_mask(pred, gt, mask);
  ConfusionCounts counts;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!mask[i]) continue;
    const bool p = !pred[i].is_empty();
    const bool g = !gt[i].is_empty();
    counts.tp += p && g;
    counts.fp += p && !g;
    counts.fn += !p && g;
  }
  return ScMetrics::from_counts(counts);
}

MetricsReport ssc_metrics(const LabelGrid& pred, const LabelGrid& gt, const EvalMask& mask) {
  require_mask(pred, gt, mask);
  // Full label confusion matrix, then per-class TP/FP/FN from its rows and columns.
  std::array<std::array<std::uint64_t, kNumLabels>, kNumLabels> confusion{};
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!mask[i]) continue;
    ++confusion[gt[i].code()][pred[i].code()];
  }
  std::array<ConfusionCounts, kNumLabels> per_class{};
  for (int g = 0; g < kNumLabels; ++g) {
    for (int p = 0; p < kNumLabels; ++p) {
      const std::uint64_t n = confusion[g][p];
      if (g == p) {
        per_class[g].tp += n;
      } else {
        per_class[p].fp += n;
        per_class[g].fn += n;
      }
    }
  }
  ConfusionCounts sc;
  for (int g = 0; g < kNumLabels; ++g) {
    for (int p = 0; p < kNumLabels; ++p) {
      const std::uint64_t n = confusion[g][p];
      if (g != 0 && p != 0) sc.tp += n;
      if (g == 0 && p != 0) sc.fp += n;
      if (g != 0 && p == 0) sc.fn += n;
    }
  }
  return MetricsReport::from_counts(sc, per_class);
}

void MetricsAccumulator::add(const LabelGrid& pred, const LabelGrid& gt, const EvalMask& mask) {
  scenes_.push_back(ssc_metrics(pred, gt, mask));
}

void MetricsAccumulator::add(const MetricsReport& scene) { scenes_.push_back(scene); }

MetricsReport MetricsAccumulator::report(Averaging averaging) const {
  if (scenes_.empty()) throw std::invalid_argument("no scenes accumulated");
  ConfusionCounts sc;
  std::array<ConfusionCounts, kNumLabels> per_class{};
  for (const MetricsReport& s : scenes_) {
    sc += s.sc.counts;
    for (int c = 0; c < kNumLabels; ++c) per_class[c] += s.class_counts[c];
  }
  MetricsReport total = MetricsReport::from_counts(sc, per_class);
  if (averaging == Averaging::kMicro) return total;

  auto mean_of = [&](auto pick) -> std::optional<double> {
    double sum = 0.0;
    int n = 0;
    for (const MetricsReport& s : scenes_) {
      if (const std::optional<double> v = pick(s)) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / n;
  };
  total.sc.precision = mean_of([](const MetricsReport& s) { return s.sc.precision; });
  total.sc.recall = mean_of([](const MetricsReport& s) { return s.sc.recall; });
  total.sc.iou = mean_of([](const MetricsReport& s) { return s.sc.iou; });
  total.excluded_classes.clear();
  double sum = 0.0;
  int defined = 0;
  for (int c = 1; c <= kNumObjectClasses; ++c) {
    total.class_iou[c] = mean_of([c](const MetricsReport& s) { return s.class_iou[c]; });
    if (total.class_iou[c]) {
      sum += *total.class_iou[c];
      ++defined;
    } else {
      total.excluded_classes.push_back(c);
    }
  }
  total.mean_iou = defined > 0 ? std::optional<double>(sum / defined) : std::nullopt;
  return total;
}

}  // namespace ssc
