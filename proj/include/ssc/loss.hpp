#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ssc {

/// Neumaier-compensated accumulator. Gives the same result for a given input
/// order regardless of how the surrounding loop is scheduled.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

namespace detail {

/// Row-major voxels x classes matrix.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;
  ScoreMatrix(std::size_t voxels, int classes, std::vector<double> values);
  ScoreMatrix(std::size_t voxels, int classes);

  std::size_t voxels() const { return voxels_; }
  int classes() const { return classes_; }

  double operator()(std::size_t n, int c) const { return values_[offset(n, c)]; }
  std::span<const double> row(std::size_t n) const {
    return std::span<const double>(values_).subspan(offset(n, 0),
                                                    static_cast<std::size_t>(classes_));
  }
  std::span<const double> values() const { return values_; }

 protected:
  std::size_t offset(std::size_t n, int c) const {
    return n * static_cast<std::size_t>(classes_) + static_cast<std::size_t>(c);
  }

  std::size_t voxels_ = 0;
  int classes_ = 0;
  std::vector<double> values_;
};

}  // namespace detail

/// Unnormalized per-class scores. All entries finite.
class LogitVolume : public detail::ScoreMatrix {
 public:
  LogitVolume() = default;
  LogitVolume(std::size_t voxels, int classes, std::vector<double> values);

  double& at(std::size_t n, int c) { return values_[offset(n, c)]; }
  using detail::ScoreMatrix::operator();
};

/// Row-stochastic class probabilities: entries in [0, 1], rows summing to 1
/// within 1e-9.
class ProbabilityVolume : public detail::ScoreMatrix {
 public:
  ProbabilityVolume() = default;
  ProbabilityVolume(std::size_t voxels, int classes, std::vector<double> values);

 private:
  friend ProbabilityVolume softmax(const LogitVolume& logits);
  struct Unchecked {};
  ProbabilityVolume(Unchecked, std::size_t voxels, int classes, std::vector<double> values);
};

/// Gradient of a scalar loss with respect to a LogitVolume.
class LogitGradient : public detail::ScoreMatrix {
 public:
  using detail::ScoreMatrix::ScoreMatrix;
  double& at(std::size_t n, int c) { return values_[offset(n, c)]; }
  using detail::ScoreMatrix::operator();
};

/// Ground-truth class per voxel plus an optional participation mask.
class TargetVolume {
 public:
  TargetVolume(int classes, std::vector<int> labels,
               std::optional<std::vector<std::uint8_t>> mask = std::nullopt);

  int classes() const { return classes_; }
  std::size_t size() const { return labels_.size(); }
  int label(std::size_t n) const { return labels_[n]; }
  const std::vector<int>& labels() const { return labels_; }
  bool participates(std::size_t n) const { return !mask_ || (*mask_)[n] != 0; }
  bool has_mask() const { return mask_.has_value(); }
  std::size_t participating_count() const;

 private:
  int classes_;
  std::vector<int> labels_;
  std::optional<std::vector<std::uint8_t>> mask_;
};

/// Per-class weights, non-negative with at least one positive entry.
class ClassWeights {
 public:
  explicit ClassWeights(std::vector<double> weights);
  static ClassWeights uniform(int classes) {
    return ClassWeights(std::vector<double>(static_cast<std::size_t>(classes), 1.0));
  }

  int classes() const { return static_cast<int>(weights_.size()); }
  double operator[](int c) const { return weights_[static_cast<std::size_t>(c)]; }
  const std::vector<double>& values() const { return weights_; }

 private:
  std::vector<double> weights_;
};

inline constexpr double kDefaultEpsilon = 1e-12;
inline constexpr double kDefaultGamma = 2.0;

struct LossConfig {
  double lambda = 1.0;
  double alpha = 0.5;
  double gamma = kDefaultGamma;
  double epsilon = kDefaultEpsilon;

  void validate() const;
};

/// Row-wise softmax with the row maximum subtracted first.
ProbabilityVolume softmax(const LogitVolume& logits);

/// Position-aware cross-entropy: -(1/N) sum_n I_n log p_n,true over
/// participating voxels. Divides by the voxel count, not by sum(I).
double pa_loss(const ProbabilityVolume& probs, const TargetVolume& targets,
               std::span<const double> importance, double epsilon = kDefaultEpsilon);

/// (I_n / N) (softmax(z_n) - onehot_n); masked rows are zero.
LogitGradient pa_loss_grad(const LogitVolume& logits, const TargetVolume& targets,
                           std::span<const double> importance);

/// Inverse-frequency weights from per-class voxel counts, scaled so the
/// largest weight is 1. Throws DomainError naming the first class with a zero
/// count.
ClassWeights class_weights_from_counts(std::span<const std::uint64_t> counts);

/// Same, counting `labels` (empty voxels included) over `classes` classes.
ClassWeights class_weights_from_frequency(std::span<const int> labels, int classes);

double wce_loss(const ProbabilityVolume& probs, const TargetVolume& targets,
                const ClassWeights& weights, double epsilon = kDefaultEpsilon);
LogitGradient wce_loss_grad(const LogitVolume& logits, const TargetVolume& targets,
                            const ClassWeights& weights);

/// -(1/N) sum_n (1 - p)^gamma log p on the true class. Throws DomainError for
/// gamma < 0.
double focal_loss(const ProbabilityVolume& probs, const TargetVolume& targets,
                  double gamma = kDefaultGamma, double epsilon = kDefaultEpsilon);
LogitGradient focal_loss_grad(const LogitVolume& logits, const TargetVolume& targets,
                              double gamma = kDefaultGamma, double epsilon = kDefaultEpsilon);

/// sum_c [1 - 2 sum_n y p / (sum_n y^2 + sum_n p^2 + epsilon)]. A class absent
/// from both targets and predictions contributes 1.
double dice_loss(const ProbabilityVolume& probs, const TargetVolume& targets,
                 double epsilon = kDefaultEpsilon);
LogitGradient dice_loss_grad(const LogitVolume& logits, const TargetVolume& targets,
                             double epsilon = kDefaultEpsilon);

enum class LossKind { kPositionAware, kWeightedCrossEntropy, kFocal, kDice };

std::string_view loss_name(LossKind kind);
/// Accepts "pa", "wce", "focal", "dice". Throws std::invalid_argument otherwise.
LossKind parse_loss_kind(std::string_view name);

/// A loss together with everything it needs besides predictions and targets.
struct LossFunction {
  LossKind kind = LossKind::kPositionAware;
  LossConfig config;
  /// Per-voxel weights for kPositionAware.
  std::vector<double> importance;
  /// Per-class weights for kWeightedCrossEntropy.
  std::optional<ClassWeights> weights;

  double value(const ProbabilityVolume& probs, const TargetVolume& targets) const;
  double value(const LogitVolume& logits, const TargetVolume& targets) const {
    return value(softmax(logits), targets);
  }
  LogitGradient gradient(const LogitVolume& logits, const TargetVolume& targets) const;
};

/// Largest |g - g_fd| / max(|g|, |g_fd|, abs_floor) over all logits, where g_fd
/// is the central difference with the given step.
double finite_diff_check(const LossFunction& loss, const LogitVolume& logits,
                         const TargetVolume& targets, double step,
                         double abs_floor = 1e-6);

/// Same, checking a caller-supplied gradient instead of loss.gradient().
double finite_diff_check(const LossFunction& loss, const LogitVolume& logits,
                         const TargetVolume& targets, const LogitGradient& analytic,
                         double step, double abs_floor = 1e-6);

}  // namespace ssc
