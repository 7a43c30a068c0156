#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "clorient/common_lines.hpp"
#include "clorient/rotations.hpp"

// Plain-text, diff-able file formats. Rotations are rows of nine row-major
// values; common lines are grid-indexed angles so a simulated set round-trips
// bit-exactly; everything else is `key = value` lines.

namespace clorient::io {

std::string format_double(double v);  // shortest exact decimal form

void write_rotations(const std::filesystem::path& path, const RotationList& rotations);
RotationList read_rotations(const std::filesystem::path& path);

// Header line "K n_theta", then one record per pair:
// "i j m_ij m_ji is_outlier" with angles as grid indices in [0, n_theta).
void write_common_lines(const std::filesystem::path& path, const CommonLineSet& cls);
CommonLineSet read_common_lines(const std::filesystem::path& path);

using KeyValues = std::vector<std::pair<std::string, std::string>>;
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

}  // namespace clorient::io
