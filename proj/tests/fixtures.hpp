#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "prime/dataset.hpp"

namespace fixture {

/// Observation pattern of a 10-subject example, 8 covariates,
/// columns 0-2 nonlinear and 3-7 linear.
inline prime::Mask table1_mask() {
  const int rows[10][8] = {
      {1, 1, 1, 1, 1, 1, 1, 1}, {1, 1, 1, 1, 1, 1, 1, 1}, {1, 1, 0, 1, 1, 0, 0, 0}, {1, 1, 0, 1, 1, 0, 0, 0},
      {1, 1, 1, 0, 1, 0, 1, 1}, {1, 1, 1, 0, 1, 0, 1, 1}, {1, 1, 1, 0, 1, 1, 1, 1}, {1, 1, 1, 0, 1, 1, 1, 1},
      {1, 0, 0, 1, 0, 1, 1, 1}, {1, 0, 0, 1, 0, 1, 1, 1}};
  prime::Mask m(10, 8);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 8; ++j) m(i, j) = rows[i][j] == 1;
  }
  return m;
}

inline prime::ModelStructure structure_3_5() { return {{0, 1, 2}, {3, 4, 5, 6, 7}}; }

/// Ten-subject data on table1_mask() with random values; nonlinear columns in [0, 1].
inline prime::ObservationTable table1(std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(1.0, 1.0);
  prime::Matrix x(10, 8);
  prime::Vector y(10);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 3; ++j) x(i, j) = u(rng);
    for (int j = 3; j < 8; ++j) x(i, j) = z(rng);
    y(i) = z(rng);
  }
  return prime::make_table(y, x, table1_mask(), structure_3_5());
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("prime_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace fixture
