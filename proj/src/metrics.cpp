#include "ogsbl/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace ogsbl {

double to_db(double linear) { return 10.0 * std::log10(std::max(linear, 1e-300)); }

std::string histogram_string(const std::vector<long>& histogram) {
  std::string out;
  for (std::size_t i = 0; i < histogram.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(histogram[i]);
  }
  return out;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "scheme,sweep_var,sweep_value,nmse_db,mean_layers,histogram,seconds\n";
  char buf[256];
  for (const MetricsRow& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.6g,%.6f,%.4f,", r.sweep_value, to_db(r.nmse_linear), r.mean_layers);
    out += r.scheme + "," + r.sweep_var + "," + buf + histogram_string(r.histogram) + ",";
    std::snprintf(buf, sizeof(buf), "%.3f", r.seconds);
    out += buf;
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open file for writing: " + path);
  os << content;
  if (!os) throw IoError("write failure: " + path);
}

}  // namespace ogsbl
