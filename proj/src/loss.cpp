#include "ssc/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ssc/error.hpp"

namespace ssc {

namespace detail {

ScoreMatrix::ScoreMatrix(std::size_t voxels, int classes, std::vector<double> values)
    : voxels_(voxels), classes_(classes), values_(std::move(values)) {
  if (classes <= 0) throw std::invalid_argument("class count must be positive");
  if (values_.size() != voxels * static_cast<std::size_t>(classes)) {
    throw std::invalid_argument("score matrix has " + std::to_string(values_.size()) +
                                " entries, expected " + std::to_string(voxels) + " x " +
                                std::to_string(classes));
  }
}

ScoreMatrix::ScoreMatrix(std::size_t voxels, int classes)
    : ScoreMatrix(voxels, classes,
                  std::vector<double>(voxels * static_cast<std::size_t>(std::max(classes, 0)),
                                      0.0)) {}

}  // namespace detail

LogitVolume::LogitVolume(std::size_t voxels, int classes, std::vector<double> values)
    : ScoreMatrix(voxels, classes, std::move(values)) {
  for (const double z : values_) {
    if (!std::isfinite(z)) throw std::invalid_argument("logits must be finite");
  }
}

ProbabilityVolume::ProbabilityVolume(std::size_t voxels, int classes, std::vector<double> values)
    : ScoreMatrix(voxels, classes, std::move(values)) {
  for (std::size_t n = 0; n < voxels_; ++n) {
    double total = 0.0;
    for (const double p : row(n)) {
      if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("probability outside [0, 1] in row " + std::to_string(n));
      }
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) {
      throw std::invalid_argument("probability row " + std::to_string(n) + " sums to " +
                                  std::to_string(total));
    }
  }
}

ProbabilityVolume::ProbabilityVolume(Unchecked, std::size_t voxels, int classes,
                                     std::vector<double> values)
    : ScoreMatrix(voxels, classes, std::move(values)) {}

TargetVolume::TargetVolume(int classes, std::vector<int> labels,
                           std::optional<std::vector<std::uint8_t>> mask)
    : classes_(classes), labels_(std::move(labels)), mask_(std::move(mask)) {
  if (classes <= 0) throw std::invalid_argument("class count must be positive");
  for (std::size_t n = 0; n < labels_.size(); ++n) {
    if (labels_[n] < 0 || labels_[n] >= classes) {
      throw std::invalid_argument("target label " + std::to_string(labels_[n]) + " at voxel " +
                                  std::to_string(n) + " outside 0.." +
                                  std::to_string(classes - 1));
    }
  }
  if (mask_ && mask_->size() != labels_.size()) {
    throw std::invalid_argument("target mask length does not match label count");
  }
}

std::size_t TargetVolume::participating_count() const {
  if (!mask_) return labels_.size();
  return static_cast<std::size_t>(
      std::count_if(mask_->begin(), mask_->end(), [](std::uint8_t m) { return m != 0; }));
}

ClassWeights::ClassWeights(std::vector<double> weights) : weights_(std::move(weights)) {
  bool any_positive = false;
  for (const double w : weights_) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DomainError("class weights must be finite and non-negative");
    }
    any_positive = any_positive || w > 0.0;
  }
  if (!any_positive) throw DomainError("at least one class weight must be positive");
}

void LossConfig::validate() const {
  if (!(gamma >= 0.0)) throw DomainError("focal gamma must be non-negative");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!(lambda >= 0.0) || !(alpha >= 0.0)) {
    throw DomainError("lambda and alpha must be non-negative");
  }
}

namespace {

template <class Scores>
void require_shape(const Scores& scores, const TargetVolume& targets, const char* what) {
  if (scores.voxels() != targets.size() || scores.classes() != targets.classes()) {
    throw std::invalid_argument(std::string(what) + ": predictions are " +
                                std::to_string(scores.voxels()) + " x " +
                                std::to_string(scores.classes()) + " but targets are " +
                                std::to_string(targets.size()) + " x " +
                                std::to_string(targets.classes()));
  }
}

void require_importance(std::span<const double> importance, const TargetVolume& targets) {
  if (importance.size() != targets.size()) {
    throw std::invalid_argument("importance has " + std::to_string(importance.size()) +
                                " entries, expected " + std::to_string(targets.size()));
  }
  for (const double w : importance) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw DomainError("importance values must be finite and non-negative");
    }
  }
}

void require_weights(const ClassWeights& weights, const TargetVolume& targets) {
  if (weights.classes() != targets.classes()) {
    throw std::invalid_argument("class weights cover " + std::to_string(weights.classes()) +
                                " classes, expected " + std::to_string(targets.classes()));
  }
}

std::size_t require_participants(const TargetVolume& targets) {
  const std::size_t n = targets.participating_count();
  if (n == 0) throw DomainError("no participating voxels");
  return n;
}

double floored_log(double p, double epsilon) { return std::log(std::max(p, epsilon)); }

/// -(1/N) sum_n weight(n) * log p_n,true.
template <class WeightFn>
double weighted_nll(const ProbabilityVolume& probs, const TargetVolume& targets, double epsilon,
                    WeightFn weight) {
  const std::size_t count = require_participants(targets);
  CompensatedSum sum;
  for (std::size_t n = 0; n < probs.voxels(); ++n) {
    if (!targets.participates(n)) continue;
    const int t = targets.label(n);
    sum.add(weight(n, probs(n, t)) * floored_log(probs(n, t), epsilon));
  }
  return -sum.value() / static_cast<double>(count);
}

/// (w_n / N) (softmax(z_n) - onehot_n).
template <class WeightFn>
LogitGradient weighted_nll_grad(const LogitVolume& logits, const TargetVolume& targets,
                                WeightFn weight) {
  const std::size_t count = require_participants(targets);
  const ProbabilityVolume probs = softmax(logits);
  LogitGradient grad(logits.voxels(), logits.classes());
  const double inv_n = 1.0 / static_cast<double>(count);
  for (std::size_t n = 0; n < logits.voxels(); ++n) {
    if (!targets.participates(n)) continue;
    const int t = targets.label(n);
    const double scale = weight(n) * inv_n;
    for (int c = 0; c < logits.classes(); ++c) {
      grad.at(n, c) = scale * (probs(n, c) - (c == t ? 1.0 : 0.0));
    }
  }
  return grad;
}

void require_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw DomainError("focal gamma must be finite and non-negative, got " +
                      std::to_string(gamma));
  }
}

}  // namespace

ProbabilityVolume softmax(const LogitVolume& logits) {
  const auto classes = static_cast<std::size_t>(logits.classes());
  std::vector<double> out(logits.values().size());
  for (std::size_t n = 0; n < logits.voxels(); ++n) {
    const auto row = logits.row(n);
    const double top = *std::max_element(row.begin(), row.end());
    double* dst = out.data() + n * classes;
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      dst[c] = std::exp(row[c] - top);
      total += dst[c];
    }
    for (std::size_t c = 0; c < classes; ++c) dst[c] /= total;
  }
  return ProbabilityVolume(ProbabilityVolume::Unchecked{}, logits.voxels(), logits.classes(),
                           std::move(out));
}

double pa_loss(const ProbabilityVolume& probs, const TargetVolume& targets,
               std::span<const double> importance, double epsilon) {
  require_shape(probs, targets, "pa_loss");
  require_importance(importance, targets);
  return weighted_nll(probs, targets, epsilon,
                      [&](std::size_t n, double) { return importance[n]; });
}

LogitGradient pa_loss_grad(const LogitVolume& logits, const TargetVolume& targets,
                           std::span<const double> importance) {
  require_shape(logits, targets, "pa_loss_grad");
  require_importance(importance, targets);
  return weighted_nll_grad(logits, targets, [&](std::size_t n) { return importance[n]; });
}

ClassWeights class_weights_from_counts(std::span<const std::uint64_t> counts) {
  if (counts.empty()) throw std::invalid_argument("no classes to weight");
  std::uint64_t total = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] == 0) {
      throw DomainError("class " + std::to_string(c) + " never observed; cannot weight it");
    }
    total += counts[c];
  }
  // 1/freq_c = total/count_c; the maximum belongs to the rarest class.
  const std::uint64_t rarest = *std::min_element(counts.begin(), counts.end());
  std::vector<double> weights(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    weights[c] = static_cast<double>(rarest) / static_cast<double>(counts[c]);
  }
  return ClassWeights(std::move(weights));
}

ClassWeights class_weights_from_frequency(std::span<const int> labels, int classes) {
  if (classes <= 0) throw std::invalid_argument("class count must be positive");
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(classes), 0);
  for (const int l : labels) {
    if (l < 0 || l >= classes) {
      throw std::invalid_argument("label " + std::to_string(l) + " outside 0.." +
                                  std::to_string(classes - 1));
    }
    ++counts[static_cast<std::size_t>(l)];
  }
  return class_weights_from_counts(counts);
}

double wce_loss(const ProbabilityVolume& probs, const TargetVolume& targets,
                const ClassWeights& weights, double epsilon) {
  require_shape(probs, targets, "wce_loss");
  require_weights(weights, targets);
  return weighted_nll(probs, targets, epsilon,
                      [&](std::size_t n, double) { return weights[targets.label(n)]; });
}

LogitGradient wce_loss_grad(const LogitVolume& logits, const TargetVolume& targets,
                            const ClassWeights& weights) {
  require_shape(logits, targets, "wce_loss_grad");
  require_weights(weights, targets);
  return weighted_nll_grad(logits, targets,
                           [&](std::size_t n) { return weights[targets.label(n)]; });
}

double focal_loss(const ProbabilityVolume& probs, const TargetVolume& targets, double gamma,
                  double epsilon) {
  require_gamma(gamma);
  require_shape(probs, targets, "focal_loss");
  return weighted_nll(probs, targets, epsilon,
                      [&](std::size_t, double p) { return std::pow(1.0 - p, gamma); });
}

LogitGradient focal_loss_grad(const LogitVolume& logits, const TargetVolume& targets,
                              double gamma, double epsilon) {
  require_gamma(gamma);
  require_shape(logits, targets, "focal_loss_grad");
  const std::size_t count = require_participants(targets);
  const ProbabilityVolume probs = softmax(logits);
  LogitGradient grad(logits.voxels(), logits.classes());
  const double inv_n = 1.0 / static_cast<double>(count);
  for (std::size_t n = 0; n < logits.voxels(); ++n) {
    if (!targets.participates(n)) continue;
    const int t = targets.label(n);
    const double p = probs(n, t);
    const double q = 1.0 - p;
    // d/dp of -(1-p)^gamma log max(p, eps)
    double d_modulator = 0.0;
    if (gamma > 0.0 && q > 0.0) {
      d_modulator = gamma * std::pow(q, gamma - 1.0) * floored_log(p, epsilon);
    }
    const double d_log = p > epsilon ? std::pow(q, gamma) / p : 0.0;
    const double dl_dp = d_modulator - d_log;
    // dp_t/dz_c = p_t (delta_tc - p_c)
    for (int c = 0; c < logits.classes(); ++c) {
      grad.at(n, c) = inv_n * dl_dp * p * ((c == t ? 1.0 : 0.0) - probs(n, c));
    }
  }
  return grad;
}

namespace {

struct DiceTerms {
  std::vector<double> overlap;      // sum_n y p
  std::vector<double> denominator;  // sum_n y^2 + sum_n p^2 + eps
};

DiceTerms dice_terms(const ProbabilityVolume& probs, const TargetVolume& targets,
                     double epsilon) {
  const auto classes = static_cast<std::size_t>(probs.classes());
  std::vector<CompensatedSum> overlap(classes), target_sq(classes), pred_sq(classes);
  for (std::size_t n = 0; n < probs.voxels(); ++n) {
    if (!targets.participates(n)) continue;
    const auto t = static_cast<std::size_t>(targets.label(n));
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = probs(n, static_cast<int>(c));
      pred_sq[c].add(p * p);
    }
    overlap[t].add(probs(n, static_cast<int>(t)));
    target_sq[t].add(1.0);
  }
  DiceTerms terms{std::vector<double>(classes), std::vector<double>(classes)};
  for (std::size_t c = 0; c < classes; ++c) {
    terms.overlap[c] = overlap[c].value();
    terms.denominator[c] = target_sq[c].value() + pred_sq[c].value() + epsilon;
  }
  return terms;
}

}  // namespace

double dice_loss(const ProbabilityVolume& probs, const TargetVolume& targets, double epsilon) {
  require_shape(probs, targets, "dice_loss");
  if (!(epsilon > 0.0)) throw DomainError("dice epsilon must be positive");
  const DiceTerms terms = dice_terms(probs, targets, epsilon);
  CompensatedSum loss;
  for (std::size_t c = 0; c < terms.overlap.size(); ++c) {
    loss.add(1.0 - 2.0 * terms.overlap[c] / terms.denominator[c]);
  }
  return loss.value();
}

LogitGradient dice_loss_grad(const LogitVolume& logits, const TargetVolume& targets,
                             double epsilon) {
  require_shape(logits, targets, "dice_loss_grad");
  if (!(epsilon > 0.0)) throw DomainError("dice epsilon must be positive");
  const ProbabilityVolume probs = softmax(logits);
  const DiceTerms terms = dice_terms(probs, targets, epsilon);
  const int classes = logits.classes();
  LogitGradient grad(logits.voxels(), classes);
  std::vector<double> dl_dp(static_cast<std::size_t>(classes));
  for (std::size_t n = 0; n < logits.voxels(); ++n) {
    if (!targets.participates(n)) continue;
    const int t = targets.label(n);
    double weighted = 0.0;
    for (int c = 0; c < classes; ++c) {
      const auto k = static_cast<std::size_t>(c);
      const double d = terms.denominator[k];
      const double y = c == t ? 1.0 : 0.0;
      dl_dp[k] = -2.0 * y / d + 4.0 * terms.overlap[k] * probs(n, c) / (d * d);
      weighted += dl_dp[k] * probs(n, c);
    }
    // softmax Jacobian: dL/dz_j = p_j (dL/dp_j - sum_k dL/dp_k p_k)
    for (int c = 0; c < classes; ++c) {
      grad.at(n, c) = probs(n, c) * (dl_dp[static_cast<std::size_t>(c)] - weighted);
    }
  }
  return grad;
}

std::string_view loss_name(LossKind kind) {
  switch (kind) {
    case LossKind::kPositionAware:
      return "pa";
    case LossKind::kWeightedCrossEntropy:
      return "wce";
    case LossKind::kFocal:
      return "focal";
    case LossKind::kDice:
      return "dice";
  }
  return "unknown";
}

LossKind parse_loss_kind(std::string_view name) {
  for (const LossKind kind : {LossKind::kPositionAware, LossKind::kWeightedCrossEntropy,
                              LossKind::kFocal, LossKind::kDice}) {
    if (loss_name(kind) == name) return kind;
  }
  throw std::invalid_argument("unknown loss '" + std::string(name) +
                              "' (expected pa, wce, focal or dice)");
}

namespace {

const ClassWeights& weights_or_throw(const LossFunction& loss) {
  if (!loss.weights) throw std::invalid_argument("weighted cross-entropy needs class weights");
  return *loss.weights;
}

}  // namespace

double LossFunction::value(const ProbabilityVolume& probs, const TargetVolume& targets) const {
  switch (kind) {
    case LossKind::kPositionAware:
      return pa_loss(probs, targets, importance, config.epsilon);
    case LossKind::kWeightedCrossEntropy:
      return wce_loss(probs, targets, weights_or_throw(*this), config.epsilon);
    case LossKind::kFocal:
      return focal_loss(probs, targets, config.gamma, config.epsilon);
    case LossKind::kDice:
      return dice_loss(probs, targets, config.epsilon);
  }
  throw std::logic_error("unhandled loss kind");
}

LogitGradient LossFunction::gradient(const LogitVolume& logits,
                                     const TargetVolume& targets) const {
  switch (kind) {
    case LossKind::kPositionAware:
      return pa_loss_grad(logits, targets, importance);
    case LossKind::kWeightedCrossEntropy:
      return wce_loss_grad(logits, targets, weights_or_throw(*this));
    case LossKind::kFocal:
      return focal_loss_grad(logits, targets, config.gamma, config.epsilon);
    case LossKind::kDice:
      return dice_loss_grad(logits, targets, config.epsilon);
  }
  throw std::logic_error("unhandled loss kind");
}

double finite_diff_check(const LossFunction& loss, const LogitVolume& logits,
                         const TargetVolume& targets, double step, double abs_floor) {
  return finite_diff_check(loss, logits, targets, loss.gradient(logits, targets), step,
                           abs_floor);
}

double finite_diff_check(const LossFunction& loss, const LogitVolume& logits,
                         const TargetVolume& targets, const LogitGradient& analytic,
                         double step, double abs_floor) {
  if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  if (analytic.voxels() != logits.voxels() || analytic.classes() != logits.classes()) {
    throw std::invalid_argument("gradient shape does not match logits");
  }
  // pa, wce and focal are (1/N) sum_n l_n with l_n depending only on row n, so
  // the difference is taken on that row's term alone: same derivative, without
  // the cancellation noise of differencing the full sum (about ulp(L) / step).
  const bool separable = loss.kind != LossKind::kDice;
  const std::size_t participating = targets.participating_count();
  const int classes = logits.classes();

  LogitVolume probe = logits;
  double worst = 0.0;
  for (std::size_t n = 0; n < logits.voxels(); ++n) {
    std::optional<LossFunction> row_loss;
    std::optional<TargetVolume> row_target;
    LogitVolume row;
    if (separable && targets.participates(n)) {
      row_loss = loss;
      if (!loss.importance.empty()) row_loss->importance = {loss.importance.at(n)};
      row_target.emplace(classes, std::vector<int>{targets.label(n)});
      const auto r = logits.row(n);
      row = LogitVolume(1, classes, std::vector<double>(r.begin(), r.end()));
    }
    for (int c = 0; c < classes; ++c) {
      double numeric = 0.0;
      if (!separable) {
        const double original = probe(n, c);
        probe.at(n, c) = original + step;
        const double up = loss.value(probe, targets);
        probe.at(n, c) = original - step;
        const double down = loss.value(probe, targets);
        probe.at(n, c) = original;
        numeric = (up - down) / (2.0 * step);
      } else if (row_loss) {
        const double original = row(0, c);
        row.at(0, c) = original + step;
        const double up = row_loss->value(row, *row_target);
        row.at(0, c) = original - step;
        const double down = row_loss->value(row, *row_target);
        row.at(0, c) = original;
        numeric = (up - down) / (2.0 * step) / static_cast<double>(participating);
      }
      // Masked rows do not enter the loss at all, so their derivative is 0.

      const double exact = analytic(n, c);
      const double scale = std::max({std::abs(exact), std::abs(numeric), abs_floor});
      worst = std::max(worst, std::abs(exact - numeric) / scale);
    }
  }
  return worst;
}

}  // namespace ssc
