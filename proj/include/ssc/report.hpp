#pragma once

#include <optional>
#include <string>

#include "ssc/lga.hpp"
#include "ssc/metrics.hpp"

namespace ssc::report {

/// 12 significant digits, or "undefined".
std::string number(std::optional<double> value);

/// `key: value` lines: SC precision/recall/IoU, per-class IoU and raw counts,
/// mIoU and the classes left out of it.
std::string metrics_text(const MetricsReport& report);

/// `key: value` lines with count and fraction per LGA value.
std::string lga_text(const LgaHistogram& histogram);

/// CSV with header `lga,count,fraction`.
std::string lga_csv(const LgaHistogram& histogram);

}  // namespace ssc::report
