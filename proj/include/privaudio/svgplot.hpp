#pragma once

#include <string>
#include <vector>

#include "privaudio/harness.hpp"

namespace privaudio {

/// t in [0, 1] -> "#rrggbb" on a monotone-luminance colormap (dark violet
/// through teal to yellow). Out-of-range t is clamped.
std::string viridis_hex(double t);

/// Renders every figure a results file defines and returns the paths written.
/// Reads only the CSV, so any figure can be regenerated offline from results
/// alone; throws IoError if rows mix config hashes or the scenario column is
/// unknown.
std::vector<std::string> render_svgs(const std::string& csv_path, const std::string& out_dir);

}  // namespace privaudio
