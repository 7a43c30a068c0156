#include "clorient/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "clorient/errors.hpp"
#include "clorient/simulate.hpp"

namespace clorient::io {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

[[noreturn]] void parse_failure(const std::filesystem::path& path, int line_no,
                                const std::string& line) {
  throw IoError("parse error in " + path.string() + " at line " + std::to_string(line_no) +
                ": '" + line + "'");
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_rotations(const std::filesystem::path& path, const RotationList& rotations) {
  auto out = open_for_write(path);
  for (const auto& r : rotations) {
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 3; ++col) {
        out << format_double(r(row, col));
        out << (row == 2 && col == 2 ? '\n' : ' ');
      }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

RotationList read_rotations(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  RotationList out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream iss(line);
    Eigen::Matrix3d r;
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 3; ++col)
        if (!(iss >> r(row, col))) parse_failure(path, line_no, line);
    out.push_back(r);
  }
  return out;
}

void write_common_lines(const std::filesystem::path& path, const CommonLineSet& cls) {
  auto out = open_for_write(path);
  out << cls.k << ' ' << cls.n_theta << '\n';
  for (const auto& p : cls.pairs) {
    const auto index = [&](const Eigen::Vector2d& c) {
      return detail::snap_angle(std::atan2(c.y(), c.x()), cls.n_theta);
    };
    out << p.i << ' ' << p.j << ' ' << index(p.c_ij) << ' ' << index(p.c_ji) << ' '
        << (p.is_outlier ? 1 : 0) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

CommonLineSet read_common_lines(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::string line;
  int line_no = 0;
  CommonLineSet cls;
  if (!std::getline(in, line)) throw IoError("empty common-line file: " + path.string());
  ++line_no;
  {
    std::istringstream iss(line);
    if (!(iss >> cls.k >> cls.n_theta)) parse_failure(path, line_no, line);
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::istringstream iss(line);
    int i = 0, j = 0, m_ij = 0, m_ji = 0, outlier = 0;
    if (!(iss >> i >> j >> m_ij >> m_ji >> outlier)) parse_failure(path, line_no, line);
    CommonLinePair pair;
    pair.i = i;
    pair.j = j;
    pair.c_ij = detail::unit_from_grid(m_ij, cls.n_theta);
    pair.c_ji = detail::unit_from_grid(m_ji, cls.n_theta);
    pair.is_outlier = outlier != 0;
    cls.pairs.push_back(pair);
  }
  validate(cls);
  return cls;
}

void write_key_values(const std::filesystem::path& path, const KeyValues& kv) {
  auto out = open_for_write(path);
  for (const auto& [key, value] : kv) out << key << " = " << value << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::map<std::string, std::string> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_failure(path, line_no, line);
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace clorient::io
