#include "p3o/csvlog.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace p3o {

std::string format_metric(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string metrics_to_csv(const History& h) {
  std::ostringstream os;
  os << kMetricsSchema << "\n";
  const auto& cols = metrics_columns();
  for (size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const MetricsRow& r : h.rows) {
    os << r.iteration << "," << r.env_steps << "," << format_metric(r.mean_return) << ","
       << format_metric(r.eval_return) << "," << format_metric(r.deon) << ","
       << format_metric(r.cpi_value) << "," << format_metric(r.mean_kl) << ","
       << format_metric(r.entropy) << "," << format_metric(r.lr) << ","
       << format_metric(r.frac_above) << "," << format_metric(r.frac_below) << "\n";
  }
  return os.str();
}

void write_metrics_csv(const History& h, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError("cannot write '" + path + "'");
  out << metrics_to_csv(h);
}

History read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kMetricsSchema)
    throw CsvError(path + ": missing schema tag '" + kMetricsSchema + "'");

  std::string header;
  if (!std::getline(in, header)) throw CsvError(path + ": missing header row");
  {
    std::ostringstream expect;
    const auto& cols = metrics_columns();
    for (size_t i = 0; i < cols.size(); ++i) expect << (i ? "," : "") << cols[i];
    if (header != expect.str())
      throw CsvError(path + ": header mismatch, got '" + header + "'");
  }

  History h;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> f;
    std::istringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) f.push_back(std::stod(tok));
    if (f.size() != metrics_columns().size())
      throw CsvError(path + ": row with " + std::to_string(f.size()) + " fields");
    MetricsRow r;
    r.iteration = static_cast<long>(f[0]);
    r.env_steps = static_cast<long>(f[1]);
    r.mean_return = f[2];
    r.eval_return = f[3];
    r.deon = f[4];
    r.cpi_value = f[5];
    r.mean_kl = f[6];
    r.entropy = f[7];
    r.lr = f[8];
    r.frac_above = f[9];
    r.frac_below = f[10];
    h.rows.push_back(r);
  }
  return h;
}

std::string cell_filename(const std::string& variant, const std::string& env, uint64_t seed) {
  return variant + "_" + env + "_s" + std::to_string(seed) + ".csv";
}

}  // namespace p3o
