#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fleetcast/io.hpp"

namespace testutil {

// Bundled case-study dataset, loaded once per test process.
inline const fleetcast::io::Dataset& dataset() {
  static const fleetcast::io::Dataset d =
      fleetcast::io::load_dataset(FLEETCAST_DATA_DIR, 2022);
  return d;
}

inline const fleetcast::ModelParams& params() {
  static const fleetcast::ModelParams p{
      fleetcast::LogitParams{}, fleetcast::BassParams{}, dataset().survival,
      dataset().emission_factors};
  return p;
}

inline double rel_err(double value, double reference) {
  return std::abs(value - reference) /
         std::max(1e-300, std::abs(reference));
}

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace testutil
