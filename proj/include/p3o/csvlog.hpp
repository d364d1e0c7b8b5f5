#pragma once

#include <string>
#include <vector>

#include "p3o/trainer.hpp"

namespace p3o {

class CsvError : public std::runtime_error {
 public:
  explicit CsvError(const std::string& what) : std::runtime_error(what) {}
};

// Versioned schema tag written as the first CSV line; readers fail loudly
// on drift.
inline constexpr const char* kMetricsSchema = "# schema=p3o_metrics_v1";

// 9 significant digits; integers render without exponent.
std::string format_metric(double v);

std::string metrics_to_csv(const History& h);
void write_metrics_csv(const History& h, const std::string& path);
History read_metrics_csv(const std::string& path);

// `<variant>_<env>_s<seed>.csv`
std::string cell_filename(const std::string& variant, const std::string& env, uint64_t seed);

}  // namespace p3o
