#pragma once

#include <string>
#include <vector>

namespace p3o {

// Line chart of one metric vs env_steps from metrics CSVs, rendered as a
// deterministic SVG. CSVs sharing a filename prefix up to `_s<seed>` are
// grouped into one series drawn as a mean line with a min/max band.
void emit_plot(const std::vector<std::string>& csv_paths, const std::string& metric,
               const std::string& out_path);

std::string render_plot_svg(const std::vector<std::string>& csv_paths,
                            const std::string& metric);

}  // namespace p3o
