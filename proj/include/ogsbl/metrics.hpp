#pragma once

#include <string>
#include <vector>

#include "ogsbl/types.hpp"

namespace ogsbl {

/// One evaluation result line. The histogram counts executed depths
/// 1..max_layers and sums to the number of samples.
struct MetricsRow {
  std::string scheme;
  std::string sweep_var;
  double sweep_value = 0.0;
  double nmse_linear = 0.0;
  double mean_layers = 0.0;
  std::vector<long> histogram;
  double seconds = 0.0;
};

double to_db(double linear);

/// "c1;c2;...;cK" for depths 1..K.
std::string histogram_string(const std::vector<long>& histogram);

/// CSV with the fixed header scheme,sweep_var,sweep_value,nmse_db,
/// mean_layers,histogram,seconds and deterministic number formatting.
std::string metrics_csv(const std::vector<MetricsRow>& rows);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace ogsbl
