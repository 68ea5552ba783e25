#include "ssc/cli.hpp"

#include <array>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ssc/error.hpp"
#include "ssc/io.hpp"
#include "ssc/lga.hpp"
#include "ssc/loss.hpp"
#include "ssc/metrics.hpp"
#include "ssc/report.hpp"
#include "ssc/tsdf.hpp"

namespace ssc::cli {

namespace {

struct GridOptions {
  std::array<int, 3> dims{240, 144, 240};
  double voxel_size = 0.02;
  std::array<double, 3> origin{0.0, 0.0, 0.0};

  void add_to(CLI::App& cmd) {
    cmd.add_option("--dims", dims, "Grid dimensions nx ny nz")->capture_default_str();
    cmd.add_option("--voxel-size", voxel_size, "Voxel edge length, meters")
        ->capture_default_str();
    cmd.add_option("--origin", origin, "World position of the grid min-corner, meters")
        ->capture_default_str();
  }

  GridGeometry geometry() const {
    GridGeometry g{{dims[0], dims[1], dims[2]},
                   voxel_size,
                   Eigen::Vector3d(origin[0], origin[1], origin[2])};
    g.validate();
    return g;
  }
};

struct EncodeArgs {
  std::string depth, camera, out;
  GridOptions grid;
  double truncation = kDefaultTruncation;
  bool flipped = false;
};

struct MaskArgs {
  std::string depth, camera, out;
  GridOptions grid;
  std::vector<double> room;
};

struct LgaArgs {
  std::string labels, out;
};

struct WeightsArgs {
  std::string lga, out;
  double lambda = kDefaultLambda;
  double alpha = kDefaultAlpha;
};

struct StatsArgs {
  std::string lga;
  bool csv = false;
};

struct DownsampleArgs {
  std::string labels, out;
  int factor = 2;
};

struct LossArgs {
  std::string scores, labels, importance, mask;
  std::string loss = "pa";
  bool all = false;
  double lambda = kDefaultLambda;
  double alpha = kDefaultAlpha;
  double gamma = kDefaultGamma;
  double epsilon = kDefaultEpsilon;
  std::vector<double> weights;
  bool weights_from_labels = false;
};

struct EvalArgs {
  std::string pred, gt, mask, aggregate;
  bool macro = false;
};

std::string read_text(const std::string& path) {
  const io::Bytes data = io::read_file(path);
  return std::string(data.begin(), data.end());
}

int cmd_encode(const EncodeArgs& a, std::ostream& out) {
  const DepthMap depth = io::read_depth(a.depth);
  const io::CameraModel camera = io::read_camera(a.camera);
  const GridGeometry geometry = a.grid.geometry();
  TsdfGrid grid = compute_tsdf(depth, camera.intrinsics, camera.pose, geometry, a.truncation);
  if (a.flipped) grid = flip_tsdf(grid);
  io::write_grid(a.out, io::make_grid_file(grid));
  out << fmt::format("encoded: {}\nkind: {}\nvoxels: {}\n", a.out, a.flipped ? "f-tsdf" : "tsdf",
                     grid.size());
  return kOk;
}

int cmd_mask(const MaskArgs& a, std::ostream& out) {
  const DepthMap depth = io::read_depth(a.depth);
  const io::CameraModel camera = io::read_camera(a.camera);
  const GridGeometry geometry = a.grid.geometry();
  RoomBounds room = RoomBounds::of(geometry);
  if (!a.room.empty()) {
    if (a.room.size() != 6) throw CLI::ValidationError("--room", "expects 6 values");
    room.min = Eigen::Vector3d(a.room[0], a.room[1], a.room[2]);
    room.max = Eigen::Vector3d(a.room[3], a.room[4], a.room[5]);
  }
  const EvalMask mask = build_eval_mask(depth, camera.intrinsics, camera.pose, geometry, room);
  io::write_grid(a.out, io::make_mask_file(mask));
  std::size_t kept = 0;
  for (const auto m : mask) kept += m;
  out << fmt::format("mask: {}\nvoxels: {}\nselected: {}\n", a.out, mask.size(), kept);
  return kOk;
}

int cmd_lga(const LgaArgs& a, std::ostream& out) {
  const LabelGrid labels = io::to_labels(io::read_grid(a.labels), a.labels);
  const LgaGrid lga = compute_lga(labels);
  io::write_grid(a.out, io::make_lga_file(lga));
  out << fmt::format("lga: {}\n", a.out);
  out << report::lga_text(lga_histogram(lga));
  return kOk;
}

int cmd_weights(const WeightsArgs& a, std::ostream& out) {
  const LgaGrid lga = io::to_lga(io::read_grid(a.lga), a.lga);
  const ImportanceGrid importance = importance_grid(lga, a.lambda, a.alpha);
  io::write_grid(a.out, io::make_grid_file(importance));
  out << fmt::format("importance: {}\nlambda: {}\nalpha: {}\n", a.out,
                     report::number(a.lambda), report::number(a.alpha));
  return kOk;
}

int cmd_stats(const StatsArgs& a, std::ostream& out) {
  const LgaHistogram h = lga_histogram(io::to_lga(io::read_grid(a.lga), a.lga));
  out << (a.csv ? report::lga_csv(h) : report::lga_text(h));
  return kOk;
}

int cmd_downsample(const DownsampleArgs& a, std::ostream& out) {
  const LabelGrid labels = io::to_labels(io::read_grid(a.labels), a.labels);
  const LabelGrid small = downsample_labels(labels, a.factor);
  io::write_grid(a.out, io::make_grid_file(small));
  out << fmt::format("downsampled: {}\ndims: {} {} {}\n", a.out, small.dims().nx,
                     small.dims().ny, small.dims().nz);
  return kOk;
}

int cmd_loss(const LossArgs& a, std::ostream& out) {
  const io::ScoreFile scores = io::read_scores(a.scores);
  const ProbabilityVolume probs = scores.probabilities();
  const LabelGrid labels = io::to_labels(io::read_grid(a.labels), a.labels);
  if (labels.size() != probs.voxels()) {
    throw std::invalid_argument(fmt::format("{} has {} voxels but {} has {}", a.scores,
                                            probs.voxels(), a.labels, labels.size()));
  }

  std::vector<int> target_labels(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) target_labels[i] = labels[i].code();
  std::optional<std::vector<std::uint8_t>> mask;
  if (!a.mask.empty()) {
    const VoxelMask m = io::to_mask(io::read_grid(a.mask), a.mask);
    require_same_geometry(labels.geometry(), m.geometry(), "loss: labels vs mask");
    mask.emplace(m.begin(), m.end());
  }
  const TargetVolume targets(probs.classes(), std::move(target_labels), std::move(mask));

  LossFunction fn;
  fn.config = {a.lambda, a.alpha, a.gamma, a.epsilon};
  fn.config.validate();
  if (!a.importance.empty()) {
    const VoxelGrid<float> grid = io::to_scalars(io::read_grid(a.importance), a.importance);
    require_same_geometry(labels.geometry(), grid.geometry(), "loss: labels vs importance");
    fn.importance.assign(grid.begin(), grid.end());
  } else {
    const ImportanceGrid grid = importance_grid(compute_lga(labels), a.lambda, a.alpha);
    fn.importance.assign(grid.begin(), grid.end());
  }
  if (a.weights_from_labels) {
    fn.weights = class_weights_from_frequency(targets.labels(), probs.classes());
  } else if (!a.weights.empty()) {
    if (static_cast<int>(a.weights.size()) != probs.classes()) {
      throw std::invalid_argument(fmt::format("--weights has {} entries for {} classes",
                                              a.weights.size(), probs.classes()));
    }
    fn.weights = ClassWeights(a.weights);
  } else {
    fn.weights = ClassWeights::uniform(probs.classes());
  }

  out << fmt::format("voxels: {}\nclasses: {}\nparticipating: {}\n", probs.voxels(),
                     probs.classes(), targets.participating_count());
  std::vector<LossKind> kinds;
  if (a.all) {
    kinds = {LossKind::kPositionAware, LossKind::kWeightedCrossEntropy, LossKind::kFocal,
             LossKind::kDice};
  } else {
    kinds = {parse_loss_kind(a.loss)};
  }
  for (const LossKind kind : kinds) {
    fn.kind = kind;
    out << fmt::format("loss.{}: {}\n", loss_name(kind), report::number(fn.value(probs, targets)));
  }
  return kOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  MetricsAccumulator acc;
  auto add_scene = [&acc](const std::string& pred, const std::string& gt,
                          const std::string& mask) {
    acc.add(io::to_labels(io::read_grid(pred), pred), io::to_labels(io::read_grid(gt), gt),
            io::to_mask(io::read_grid(mask), mask));
  };
  if (!a.aggregate.empty()) {
    std::istringstream list(read_text(a.aggregate));
    std::string line;
    std::size_t line_no = 0;
    std::size_t offset = 0;
    while (std::getline(list, line)) {
      ++line_no;
      const std::size_t line_offset = offset;
      offset += line.size() + 1;
      const std::size_t first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      std::istringstream fields(line);
      std::string pred, gt, mask, extra;
      if (!(fields >> pred >> gt >> mask) || (fields >> extra)) {
        throw FormatError(a.aggregate, line_offset,
                          fmt::format("line {}: expected '<pred> <gt> <mask>'", line_no));
      }
      add_scene(pred, gt, mask);
    }
    if (acc.scenes() == 0) throw FormatError(a.aggregate, 0, "no scenes listed");
  } else {
    if (a.pred.empty() || a.gt.empty() || a.mask.empty()) {
      throw CLI::ValidationError("eval", "--pred, --gt and --mask are required without --aggregate");
    }
    add_scene(a.pred, a.gt, a.mask);
  }
  out << fmt::format("scenes: {}\naveraging: {}\n", acc.scenes(), a.macro ? "macro" : "micro");
  out << report::metrics_text(acc.report(a.macro ? Averaging::kMacro : Averaging::kMicro));
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semantic scene completion toolkit: TSDF encoding, LGA weighting, losses, metrics",
               "ssc"};
  app.require_subcommand(1);

  std::function<int()> action;

  EncodeArgs encode;
  auto* c_encode = app.add_subcommand("encode", "Encode a depth view as a TSDF / f-TSDF grid");
  c_encode->add_option("--depth", encode.depth, "Depth file (DPM1)")->required();
  c_encode->add_option("--camera", encode.camera, "Camera text file")->required();
  c_encode->add_option("--out", encode.out, "Output grid (VXG1, f32)")->required();
  encode.grid.add_to(*c_encode);
  c_encode->add_option("--truncation", encode.truncation, "Truncation distance, meters")
      ->capture_default_str();
  c_encode->add_flag("--flipped", encode.flipped, "Write the flipped TSDF");
  c_encode->callback([&] { action = [&] { return cmd_encode(encode, out); }; });

  MaskArgs mask;
  auto* c_mask = app.add_subcommand("mask", "Build the evaluation mask (view frustum and room)");
  c_mask->add_option("--depth", mask.depth, "Depth file (DPM1), defines the image size")
      ->required();
  c_mask->add_option("--camera", mask.camera, "Camera text file")->required();
  c_mask->add_option("--out", mask.out, "Output mask grid")->required();
  mask.grid.add_to(*c_mask);
  c_mask->add_option("--room", mask.room, "Room box xmin ymin zmin xmax ymax zmax (default: grid)")
      ->expected(6);
  c_mask->callback([&] { action = [&] { return cmd_mask(mask, out); }; });

  LgaArgs lga;
  auto* c_lga = app.add_subcommand("lga", "Compute local geometric anisotropy of a label grid");
  c_lga->add_option("--labels", lga.labels, "Label grid (dtype 0)")->required();
  c_lga->add_option("--out", lga.out, "Output LGA grid (dtype 2)")->required();
  c_lga->callback([&] { action = [&] { return cmd_lga(lga, out); }; });

  WeightsArgs weights;
  auto* c_weights = app.add_subcommand("weights", "Importance grid lambda + alpha * LGA");
  c_weights->add_option("--lga", weights.lga, "LGA grid (dtype 2)")->required();
  c_weights->add_option("--out", weights.out, "Output importance grid (dtype 1)")->required();
  c_weights->add_option("--lambda", weights.lambda, "Base importance")->capture_default_str();
  c_weights->add_option("--alpha", weights.alpha, "Weight per differing neighbour")
      ->capture_default_str();
  c_weights->callback([&] { action = [&] { return cmd_weights(weights, out); }; });

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "Histogram of LGA values over occupied voxels");
  c_stats->add_option("--lga", stats.lga, "LGA grid (dtype 2)")->required();
  c_stats->add_flag("--csv", stats.csv, "Print CSV instead of key: value lines");
  c_stats->callback([&] { action = [&] { return cmd_stats(stats, out); }; });

  DownsampleArgs down;
  auto* c_down = app.add_subcommand("downsample", "Majority-vote label downsampling");
  c_down->add_option("--labels", down.labels, "Label grid (dtype 0)")->required();
  c_down->add_option("--out", down.out, "Output label grid")->required();
  c_down->add_option("--factor", down.factor, "Block edge length")->capture_default_str();
  c_down->callback([&] { action = [&] { return cmd_downsample(down, out); }; });

  LossArgs loss;
  auto* c_loss = app.add_subcommand("loss", "Evaluate training losses on a prediction");
  c_loss->add_option("--scores", loss.scores, "Score file (SCR1, probabilities or logits)")
      ->required();
  c_loss->add_option("--labels", loss.labels, "Ground-truth label grid (dtype 0)")->required();
  c_loss->add_option("--importance", loss.importance,
                     "Importance grid (dtype 1); derived from the labels when omitted");
  c_loss->add_option("--mask", loss.mask, "Participation mask (dtype 3)");
  c_loss->add_option("--loss", loss.loss, "pa, wce, focal or dice")
      ->check(CLI::IsMember({"pa", "wce", "focal", "dice"}))
      ->capture_default_str();
  c_loss->add_flag("--all", loss.all, "Print all four losses");
  c_loss->add_option("--lambda", loss.lambda, "Base importance when deriving it")
      ->capture_default_str();
  c_loss->add_option("--alpha", loss.alpha, "LGA weight when deriving importance")
      ->capture_default_str();
  c_loss->add_option("--gamma", loss.gamma, "Focal exponent")->capture_default_str();
  c_loss->add_option("--epsilon", loss.epsilon, "Floor inside logs and dice denominators")
      ->capture_default_str();
  auto* weights_opt =
      c_loss->add_option("--weights", loss.weights, "Class weights for wce, one per class")
          ->delimiter(',');
  c_loss->add_flag("--weights-from-labels", loss.weights_from_labels,
                   "Inverse-frequency class weights from the label grid")
      ->excludes(weights_opt);
  c_loss->callback([&] { action = [&] { return cmd_loss(loss, out); }; });

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "Scene completion and semantic scene completion metrics");
  c_eval->add_option("--pred", eval.pred, "Predicted label grid");
  c_eval->add_option("--gt", eval.gt, "Ground-truth label grid");
  c_eval->add_option("--mask", eval.mask, "Evaluation mask grid");
  c_eval->add_option("--aggregate", eval.aggregate,
                     "Text file listing '<pred> <gt> <mask>' per line");
  c_eval->add_flag("--macro", eval.macro, "Average per-scene ratios instead of pooling counts");
  c_eval->callback([&] { action = [&] { return cmd_eval(eval, out); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    return action();
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kDomain;
  } catch (const std::logic_error& e) {
    // invalid_argument / out_of_range: inputs inconsistent with each other
    err << "error: " << e.what() << "\n";
    return kDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  }
}

}  // namespace ssc::cli
