// Acceptance checks. Prints one PASS / FAIL / SKIP line per criterion and
// exits nonzero if any criterion fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ssc/camera.hpp"
#include "ssc/io.hpp"
#include "ssc/lga.hpp"
#include "ssc/loss.hpp"
#include "ssc/metrics.hpp"
#include "ssc/synth.hpp"
#include "ssc/tsdf.hpp"

namespace {

using Clock = std::chrono::steady_clock;
using ssc::GridGeometry;
using ssc::LabelGrid;
using ssc::SemanticLabel;
using ssc::synth::Primitive;

enum class Outcome { kPass, kFail, kSkip };

struct Verdict {
  Outcome outcome;
  std::string detail;
};

Verdict pass_if(bool ok, std::string detail) { return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)}; }

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

GridGeometry cube(int n) { return GridGeometry{{n, n, n}, 0.02, Eigen::Vector3d::Zero()}; }

Verdict lga_canonical() {
  const auto start = Clock::now();
  bool ok = true;

  const LabelGrid solid = ssc::synth::rasterize({cube(5), {Primitive::box({1, 1, 1}, {3, 3, 3}, SemanticLabel(4))}});
  const auto h = ssc::lga_histogram(ssc::compute_lga(solid));
  ok &= h.counts[0] == 1 && h.counts[1] == 6 && h.counts[2] == 12 && h.counts[3] == 8 &&
        h.counts[4] + h.counts[5] + h.counts[6] == 0;

  const LabelGrid isolated = ssc::synth::rasterize({cube(3), {Primitive::box({1, 1, 1}, {1, 1, 1}, SemanticLabel(9))}});
  ok &= ssc::compute_lga(isolated)(1, 1, 1) == 6;

  const LabelGrid strip = ssc::synth::rasterize(
      {cube(7), {Primitive::strip({3, 3, 1}, ssc::synth::Axis::kZ, 5, SemanticLabel(2))}});
  const auto ls = ssc::compute_lga(strip);
  ok &= ls(3, 3, 1) == 5 && ls(3, 3, 5) == 5;
  for (int z = 2; z <= 4; ++z) ok &= ls(3, 3, z) == 4;

  // The seven cases: a voxel with k of its face neighbours carrying another
  // label, k = 0..6, both with object and with empty neighbours.
  const std::array<ssc::VoxelIndex, 6> faces{{{0, 1, 1}, {2, 1, 1}, {1, 0, 1}, {1, 2, 1}, {1, 1, 0}, {1, 1, 2}}};
  for (int k = 0; k <= 6; ++k) {
    for (const SemanticLabel other : {SemanticLabel(7), SemanticLabel::empty()}) {
      LabelGrid g(cube(3), SemanticLabel(3));
      for (int i = 0; i < k; ++i) g.at(faces[i]) = other;
      ok &= ssc::compute_lga(g)(1, 1, 1) == k;
    }
  }
  const double t = seconds_since(start);
  return pass_if(ok && t < 1.0, fmt::format("cube {{0:{},1:{},2:{},3:{}}}, {:.3f} s", h.counts[0], h.counts[1],
                                            h.counts[2], h.counts[3], t));
}

Verdict lga_oracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> side(1, 16);
  int mismatches = 0;
  const int grids = 120;
  for (int i = 0; i < grids; ++i) {
    const GridGeometry g{{side(rng), side(rng), side(rng)}, 0.02, Eigen::Vector3d::Zero()};
    const auto seed = static_cast<std::uint64_t>(i);
    const LabelGrid labels = i % 3 == 0 ? ssc::synth::rasterize(ssc::synth::random_scene(g, seed, 8))
                                        : ssc::synth::random_labels(g, seed, ssc::kNumLabels, 0.1 * (i % 8));
    const auto free = ssc::free_space_mask(labels);
    if (!(ssc::compute_lga(labels, free) == ssc::synth::oracle_lga(labels, free))) ++mismatches;
  }
  const double t = seconds_since(start);
  return pass_if(mismatches == 0 && t < 30.0,
                 fmt::format("{} grids up to 16^3, {} mismatches, {:.3f} s", grids, mismatches, t));
}

ssc::TargetVolume targets_of(const ssc::synth::LossInstance& inst) {
  std::optional<std::vector<std::uint8_t>> mask;
  if (!inst.mask.empty()) mask = inst.mask;
  return ssc::TargetVolume(inst.classes, inst.targets, mask);
}

Verdict gradient_check() {
  const auto start = Clock::now();
  std::mt19937_64 rng(777);
  std::uniform_int_distribution<int> voxels(1, 216);
  std::uniform_int_distribution<int> classes(2, 12);
  std::uniform_int_distribution<int> lga(0, 6);
  double worst = 0.0;
  double weakest_control = INFINITY;
  const int instances = 120;
  for (int i = 0; i < instances; ++i) {
    const int n = voxels(rng);
    const int c = classes(rng);
    const auto inst = ssc::synth::random_logits(static_cast<std::uint64_t>(i) + 5000, n, c, 2.0, i % 2 == 1);
    const ssc::LogitVolume z(static_cast<std::size_t>(n), c, inst.scores);
    const ssc::TargetVolume t = targets_of(inst);
    ssc::LossFunction pa;
    pa.importance.resize(static_cast<std::size_t>(n));
    for (auto& v : pa.importance) v = 1.0 + 0.5 * lga(rng);
    worst = std::max(worst, ssc::finite_diff_check(pa, z, t, 1e-4));

    ssc::LogitGradient corrupted = pa.gradient(z, t);
    std::size_t row = 0;
    while (!t.participates(row)) ++row;
    corrupted.at(row, 0) += 0.1;
    weakest_control = std::min(weakest_control, ssc::finite_diff_check(pa, z, t, corrupted, 1e-4));
  }
  const double t = seconds_since(start);
  return pass_if(worst < 1e-5 && weakest_control > 1e-3 && t < 60.0,
                 fmt::format("{} instances, max rel err {:.3e}, corrupted min {:.3e}, {:.3f} s", instances, worst,
                             weakest_control, t));
}

Verdict loss_algebra() {
  double worst_identity = 0.0;
  double worst_perfect = 0.0;
  double worst_uniform = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const int n = 216;
    const int c = 2 + static_cast<int>(seed % 11);
    const auto inst = ssc::synth::random_logits(seed + 9000, n, c, 3.0, seed % 2 == 1);
    const auto p = ssc::softmax(ssc::LogitVolume(n, c, inst.scores));
    const ssc::TargetVolume t = targets_of(inst);
    const double pa = ssc::pa_loss(p, t, std::vector<double>(n, 1.0));
    const double focal = ssc::focal_loss(p, t, 0.0);
    const double wce = ssc::wce_loss(p, t, ssc::ClassWeights::uniform(c));
    worst_identity = std::max({worst_identity, std::abs(pa - focal), std::abs(pa - wce)});

    // Perfect prediction; every class appears so no dice term takes the
    // absent-class convention.
    std::vector<int> labels(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) labels[i] = i % c;
    std::vector<double> onehot(static_cast<std::size_t>(n * c), 0.0);
    for (int i = 0; i < n; ++i) onehot[i * c + labels[i]] = 1.0;
    const ssc::ProbabilityVolume perfect(n, c, onehot);
    const ssc::TargetVolume tl(c, labels);
    worst_perfect = std::max({worst_perfect, std::abs(ssc::pa_loss(perfect, tl, std::vector<double>(n, 2.5))),
                              std::abs(ssc::wce_loss(perfect, tl, ssc::ClassWeights::uniform(c))),
                              std::abs(ssc::focal_loss(perfect, tl)), std::abs(ssc::dice_loss(perfect, tl))});

    const ssc::ProbabilityVolume uniform(n, c, std::vector<double>(static_cast<std::size_t>(n * c), 1.0 / c));
    worst_uniform = std::max(worst_uniform,
                             std::abs(ssc::pa_loss(uniform, t, std::vector<double>(n, 1.0)) - std::log(c)));
  }
  return pass_if(worst_identity <= 1e-12 && worst_perfect <= 1e-12 && worst_uniform <= 1e-12,
                 fmt::format("pa=focal=wce max diff {:.1e}, perfect max {:.1e}, uniform-ln C max {:.1e}",
                             worst_identity, worst_perfect, worst_uniform));
}

Verdict importance_arithmetic() {
  std::size_t checked = 0;
  std::size_t bad = 0;
  std::array<bool, 7> seen{};
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const GridGeometry g = cube(12);
    const LabelGrid labels = seed % 2 == 0 ? ssc::synth::random_labels(g, seed, ssc::kNumLabels, 0.4)
                                           : ssc::synth::rasterize(ssc::synth::random_scene(g, seed, 10));
    const auto lga = ssc::compute_lga(labels);
    const auto imp = ssc::importance_grid(lga, 1.0, 0.5);
    for (std::size_t i = 0; i < lga.size(); ++i) {
      ++checked;
      const double expected = lga[i] == ssc::kLgaUndefined ? 1.0 : 1.0 + 0.5 * lga[i];
      const double scaled = imp[i] * 2.0;
      const bool on_grid = scaled == std::round(scaled) && imp[i] >= 1.0 && imp[i] <= 4.0;
      if (imp[i] != expected || !on_grid) ++bad;
      if (lga[i] != ssc::kLgaUndefined) seen[lga[i]] = true;
    }
  }
  const auto levels = std::count(seen.begin(), seen.end(), true);
  return pass_if(bad == 0 && levels == 7,
                 fmt::format("{} voxels, {} mismatches, {} of 7 LGA levels exercised", checked, bad, levels));
}

Verdict metrics_oracle() {
  int mismatches = 0;
  const int instances = 120;
  const GridGeometry g = cube(8);
  for (int i = 0; i < instances; ++i) {
    const auto seed = static_cast<std::uint64_t>(i);
    const LabelGrid pred = ssc::synth::random_labels(g, 3 * seed, ssc::kNumLabels, 0.05 * (i % 10));
    const LabelGrid gt = ssc::synth::random_labels(g, 3 * seed + 1);
    const auto mask = ssc::synth::random_mask(g, 3 * seed + 2, 0.3 + 0.07 * (i % 10));
    const auto r = ssc::ssc_metrics(pred, gt, mask);
    const auto sc = ssc::sc_metrics(pred, gt, mask);
    const auto o = ssc::synth::oracle_confusion(pred, gt, mask);
    bool ok = sc.counts == ssc::ConfusionCounts{o.occupied_tp, o.occupied_fp, o.occupied_fn} &&
              r.sc.counts == sc.counts;
    for (int c = 1; c <= ssc::kNumObjectClasses; ++c) {
      ok &= r.class_counts[c] == ssc::ConfusionCounts{o.tp[c], o.fp[c], o.fn[c]};
      const std::uint64_t denom = o.tp[c] + o.fp[c] + o.fn[c];
      if (denom == 0) {
        ok &= !r.class_iou[c].has_value();
      } else {
        ok &= r.class_iou[c] == static_cast<double>(o.tp[c]) / static_cast<double>(denom);
      }
    }
    if (!ok) ++mismatches;
  }

  bool identity_ok = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LabelGrid gt = ssc::synth::random_labels(g, seed + 500);
    const auto r = ssc::ssc_metrics(gt, gt, ssc::synth::random_mask(g, seed));
    identity_ok &= r.sc.precision == 1.0 && r.sc.recall == 1.0 && r.sc.iou == 1.0 && r.mean_iou == 1.0;
    for (int c = 1; c <= ssc::kNumObjectClasses; ++c) identity_ok &= !r.class_iou[c] || *r.class_iou[c] == 1.0;
  }
  return pass_if(mismatches == 0 && identity_ok,
                 fmt::format("{} 8^3 instances, {} mismatches, identity {}", instances, mismatches,
                             identity_ok ? "all 1" : "not 1"));
}

Verdict tsdf_properties() {
  // Fronto-parallel wall 1 m in front of a 90 degree camera.
  const ssc::CameraIntrinsics intr{40.0, 40.0, 39.5, 29.5};
  const GridGeometry g{{40, 30, 75}, 0.02, Eigen::Vector3d(-0.4, -0.3, 0.0)};
  const double wall = 1.0;
  const double trunc = 0.24;
  const auto t = ssc::compute_tsdf(ssc::DepthMap(80, 60, wall), intr, ssc::CameraPose::identity(), g, trunc);
  const auto f = ssc::flip_tsdf(t);

  double worst_ramp = 0.0;
  std::size_t ramp = 0;
  for (int z = 0; z < g.dims.nz; ++z) {
    const double zc = (z + 0.5) * g.voxel_size;
    const double expected = (wall - zc) / trunc;
    if (std::abs(expected) >= 1.0 || zc <= 0.45) continue;  // clamped, or outside the frustum
    for (int y = 0; y < g.dims.ny; ++y) {
      for (int x = 0; x < g.dims.nx; ++x) {
        worst_ramp = std::max(worst_ramp, std::abs(t(x, y, z) - expected));
        ++ramp;
      }
    }
  }

  double worst_bound = 0.0;
  double worst_flip = 0.0;
  auto check_pair = [&](const ssc::TsdfGrid& a, const ssc::FlippedTsdfGrid& b) {
    for (std::size_t i = 0; i < a.size(); ++i) {
      worst_bound = std::max(worst_bound, static_cast<double>(std::abs(a[i])));
      worst_flip = std::max(worst_flip, std::abs(std::abs(static_cast<double>(b[i])) -
                                                 (1.0 - std::abs(static_cast<double>(a[i])))));
    }
  };
  check_pair(t, f);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(0.0, 3.0);
  const GridGeometry rg{{24, 20, 30}, 0.05, Eigen::Vector3d(-0.6, -0.5, 0.1)};
  for (int trial = 0; trial < 20; ++trial) {
    ssc::DepthMap depth(32, 24, 0.0);
    for (int v = 0; v < 24; ++v) {
      for (int u = 0; u < 32; ++u) {
        const double s = d(rng);
        depth.set(u, v, s < 0.3 ? 0.0 : s);
      }
    }
    const auto rt = ssc::compute_tsdf(depth, {20.0, 20.0, 15.5, 11.5}, ssc::CameraPose::identity(), rg);
    check_pair(rt, ssc::flip_tsdf(rt));
  }
  return pass_if(worst_bound <= 1.0 && worst_flip <= 1e-6 && worst_ramp <= 1e-6 && ramp > 0,
                 fmt::format("max |t| {:.6f}, max ||f|-(1-|t|)| {:.1e}, ramp err {:.1e} over {} voxels", worst_bound,
                             worst_flip, worst_ramp, ramp));
}

Verdict projection_round_trip() {
  const int w = 640;
  const int h = 640;
  const ssc::CameraIntrinsics intr{w / 2.0, h / 2.0, (w - 1) / 2.0, (h - 1) / 2.0};
  const GridGeometry g{{50, 50, 50}, 0.04, Eigen::Vector3d(-1.0, -1.0, 0.0)};
  std::size_t seen = 0;
  std::size_t kept = 0;
  for (int z = 0; z < 50; ++z) {
    for (int y = 0; y < 50; ++y) {
      for (int x = 0; x < 50; ++x) {
        const auto hit = ssc::project_to_pixel(ssc::index_to_center(g, {x, y, z}), intr,
                                               ssc::CameraPose::identity(), w, h);
        if (!hit) continue;
        ++seen;
        const auto back = ssc::world_to_index(g, ssc::pixel_ray_point(intr, hit->u, hit->v, hit->z));
        if (back && *back == ssc::VoxelIndex{x, y, z}) ++kept;
      }
    }
  }
  return pass_if(seen > 0 && kept == seen, fmt::format("{} of {} in-frustum centers recovered ({:.2f}%)", kept, seen,
                                                       seen ? 100.0 * kept / seen : 0.0));
}

Verdict nyu_lga_fraction() {
  const char* env = std::getenv("SSC_NYU_LABELS");
  if (env == nullptr || *env == '\0') {
    return {Outcome::kSkip, "set SSC_NYU_LABELS to a directory of VXG1 label grids"};
  }
  std::vector<std::filesystem::path> files;
  const std::filesystem::path root(env);
  if (std::filesystem::is_directory(root)) {
    for (const auto& e : std::filesystem::directory_iterator(root)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
  } else if (std::filesystem::exists(root)) {
    files.push_back(root);
  }
  if (files.empty()) return {Outcome::kSkip, fmt::format("no label grids under {}", env)};
  std::sort(files.begin(), files.end());
  std::uint64_t zero = 0;
  std::uint64_t defined = 0;
  for (const auto& p : files) {
    const auto h = ssc::lga_histogram(ssc::compute_lga(ssc::io::to_labels(ssc::io::read_grid(p), p.string())));
    zero += h.counts[0];
    defined += h.total();
  }
  const double fraction = static_cast<double>(zero) / static_cast<double>(defined);
  return pass_if(std::abs(fraction - 0.844) <= 0.02,
                 fmt::format("{} grids, LGA=0 fraction {:.2f}% (target 84.4 +/- 2)", files.size(), 100.0 * fraction));
}

Verdict full_resolution_timing() {
  const GridGeometry g = ssc::reference_geometry();
  const LabelGrid labels = ssc::synth::rasterize(ssc::synth::random_scene(g, 1, 60));
  const auto start = Clock::now();
  const auto lga = ssc::compute_lga(labels);
  const auto imp = ssc::importance_grid(lga);
  const double t = seconds_since(start);
  return pass_if(t < 2.0 && imp.size() == g.dims.count(),
                 fmt::format("240x144x240 LGA + importance in {:.3f} s", t));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"lga-canonical", lga_canonical},
      {"lga-oracle-equivalence", lga_oracle},
      {"gradient-check", gradient_check},
      {"loss-algebra", loss_algebra},
      {"importance-arithmetic", importance_arithmetic},
      {"metrics-oracle-equivalence", metrics_oracle},
      {"tsdf-ftsdf-properties", tsdf_properties},
      {"projection-round-trip", projection_round_trip},
      {"nyu-lga-zero-fraction", nyu_lga_fraction},
      {"full-resolution-lga-timing", full_resolution_timing},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {Outcome::kFail, fmt::format("threw: {}", e.what())};
    }
    const char* tag = v.outcome == Outcome::kPass ? "PASS" : v.outcome == Outcome::kFail ? "FAIL" : "SKIP";
    if (v.outcome == Outcome::kFail) ++failures;
    fmt::print("{} {}: {}\n", tag, name, v.detail);
  }
  return failures == 0 ? 0 : 1;
}
