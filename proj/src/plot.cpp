#include "p3o/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "p3o/csvlog.hpp"

namespace p3o {

namespace {

constexpr int kWidth = 720, kHeight = 440;
constexpr int kMarginL = 70, kMarginR = 20, kMarginT = 20, kMarginB = 50;

const char* kPalette[] = {"#d62728", "#1f77b4", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

double metric_field(const MetricsRow& r, int col) {
  switch (col) {
    case 0: return static_cast<double>(r.iteration);
    case 1: return static_cast<double>(r.env_steps);
    case 2: return r.mean_return;
    case 3: return r.eval_return;
    case 4: return r.deon;
    case 5: return r.cpi_value;
    case 6: return r.mean_kl;
    case 7: return r.entropy;
    case 8: return r.lr;
    case 9: return r.frac_above;
    case 10: return r.frac_below;
  }
  throw CsvError("bad metric column");
}

std::string series_key(const std::string& path) {
  // strip directory and the trailing _s<seed>.csv
  std::string base = path;
  const auto slash = base.find_last_of('/');
  if (slash != std::string::npos) base = base.substr(slash + 1);
  if (base.size() > 4 && base.substr(base.size() - 4) == ".csv")
    base = base.substr(0, base.size() - 4);
  const auto us = base.rfind("_s");
  if (us != std::string::npos &&
      base.find_first_not_of("0123456789", us + 2) == std::string::npos)
    base = base.substr(0, us);
  return base;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string render_plot_svg(const std::vector<std::string>& csv_paths,
                            const std::string& metric) {
  if (csv_paths.empty()) throw CsvError("emit_plot: no CSV inputs");
  const auto& cols = metrics_columns();
  int col = -1;
  for (size_t i = 0; i < cols.size(); ++i)
    if (cols[i] == metric) col = static_cast<int>(i);
  if (col < 0) throw CsvError("metric '" + metric + "' not in schema");

  // group seeds by series key, keep insertion order
  std::vector<std::string> keys;
  std::map<std::string, std::vector<History>> groups;
  for (const auto& p : csv_paths) {
    const std::string key = series_key(p);
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(read_metrics_csv(p));
  }

  // common x grid per group (env_steps of the first member)
  struct Series {
    std::string key;
    std::vector<double> x, mean, lo, hi;
  };
  std::vector<Series> series;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& key : keys) {
    const auto& runs = groups[key];
    const size_t n = runs[0].rows.size();
    for (const auto& run : runs)
      if (run.rows.size() != n)
        throw CsvError("emit_plot: seed CSVs of '" + key + "' have differing lengths");
    Series s;
    s.key = key;
    for (size_t i = 0; i < n; ++i) {
      const double x = static_cast<double>(runs[0].rows[i].env_steps);
      double lo = 1e300, hi = -1e300, acc = 0.0;
      for (const auto& run : runs) {
        const double v = metric_field(run.rows[i], col);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        acc += v;
      }
      s.x.push_back(x);
      s.mean.push_back(acc / runs.size());
      s.lo.push_back(lo);
      s.hi.push_back(hi);
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, lo);
      ymax = std::max(ymax, hi);
    }
    series.push_back(std::move(s));
  }
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto px = [&](double x) {
    return kMarginL + (x - xmin) / (xmax - xmin) * (kWidth - kMarginL - kMarginR);
  };
  auto py = [&](double y) {
    return kHeight - kMarginB - (y - ymin) / (ymax - ymin) * (kHeight - kMarginT - kMarginB);
  };

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // axes
  os << "<line x1=\"" << kMarginL << "\" y1=\"" << kHeight - kMarginB << "\" x2=\""
     << kWidth - kMarginR << "\" y2=\"" << kHeight - kMarginB
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << kMarginL << "\" y1=\"" << kMarginT << "\" x2=\"" << kMarginL
     << "\" y2=\"" << kHeight - kMarginB << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << (kMarginL + kWidth - kMarginR) / 2 << "\" y=\"" << kHeight - 12
     << "\" text-anchor=\"middle\" font-size=\"14\">env_steps</text>\n";
  os << "<text x=\"16\" y=\"" << (kMarginT + kHeight - kMarginB) / 2
     << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 16 "
     << (kMarginT + kHeight - kMarginB) / 2 << ")\">" << metric << "</text>\n";
  // tick labels at extremes
  os << "<text x=\"" << px(xmin) << "\" y=\"" << kHeight - kMarginB + 18
     << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(xmin) << "</text>\n";
  os << "<text x=\"" << px(xmax) << "\" y=\"" << kHeight - kMarginB + 18
     << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(xmax) << "</text>\n";
  os << "<text x=\"" << kMarginL - 6 << "\" y=\"" << py(ymin)
     << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(ymin) << "</text>\n";
  os << "<text x=\"" << kMarginL - 6 << "\" y=\"" << py(ymax) + 10
     << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(ymax) << "</text>\n";

  for (size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
    if (groups[s.key].size() > 1) {
      os << "<polygon fill=\"" << color << "\" opacity=\"0.15\" points=\"";
      for (size_t i = 0; i < s.x.size(); ++i)
        os << fmt(px(s.x[i])) << "," << fmt(py(s.hi[i])) << " ";
      for (size_t i = s.x.size(); i-- > 0;)
        os << fmt(px(s.x[i])) << "," << fmt(py(s.lo[i])) << " ";
      os << "\"/>\n";
    }
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i)
      os << fmt(px(s.x[i])) << "," << fmt(py(s.mean[i])) << " ";
    os << "\"/>\n";
    os << "<text x=\"" << kWidth - kMarginR - 8 << "\" y=\"" << kMarginT + 16 + 16 * si
       << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << s.key
       << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void emit_plot(const std::vector<std::string>& csv_paths, const std::string& metric,
               const std::string& out_path) {
  const std::string svg = render_plot_svg(csv_paths, metric);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw CsvError("cannot write '" + out_path + "'");
  out << svg;
}

}  // namespace p3o
