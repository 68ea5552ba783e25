#include "ssc/report.hpp"

#include <fmt/format.h>

namespace ssc::report {

std::string number(std::optional<double> value) {
  if (!value) return "undefined";
  // Adding +0.0 turns a negative zero into +0 so "-0" never reaches a report.
  return fmt::format("{:.12g}", *value + 0.0);
}

std::string metrics_text(const MetricsReport& r) {
  std::string out;
  auto line = [&out](std::string_view key, const std::string& value) {
    out += fmt::format("{}: {}\n", key, value);
  };
  line("sc.precision", number(r.sc.precision));
  line("sc.recall", number(r.sc.recall));
  line("sc.iou", number(r.sc.iou));
  line("sc.tp", std::to_string(r.sc.counts.tp));
  line("sc.fp", std::to_string(r.sc.counts.fp));
  line("sc.fn", std::to_string(r.sc.counts.fn));
  for (int c = 1; c <= kNumObjectClasses; ++c) {
    const std::string_view name = label_name(SemanticLabel(c));
    const ConfusionCounts& k = r.class_counts[c];
    line(fmt::format("ssc.{}.iou", name), number(r.class_iou[c]));
    line(fmt::format("ssc.{}.counts", name), fmt::format("tp={} fp={} fn={}", k.tp, k.fp, k.fn));
  }
  line("ssc.miou", number(r.mean_iou));
  std::string excluded;
  for (const int c : r.excluded_classes) {
    if (!excluded.empty()) excluded += ',';
    excluded += label_name(SemanticLabel(c));
  }
  line("ssc.excluded", excluded.empty() ? "none" : excluded);
  return out;
}

std::string lga_text(const LgaHistogram& h) {
  std::string out = fmt::format("lga.defined_voxels: {}\n", h.total());
  for (int k = 0; k <= kLgaNeighbors; ++k) {
    out += fmt::format("lga.{}.count: {}\n", k, h.counts[k]);
    out += fmt::format("lga.{}.fraction: {}\n", k, number(h.fractions[k]));
  }
  return out;
}

std::string lga_csv(const LgaHistogram& h) {
  std::string out = "lga,count,fraction\n";
  for (int k = 0; k <= kLgaNeighbors; ++k) {
    out += fmt::format("{},{},{}\n", k, h.counts[k], number(h.fractions[k]));
  }
  return out;
}

}  // namespace ssc::report
