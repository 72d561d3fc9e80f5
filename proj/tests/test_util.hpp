#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace test {

inline std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(TACGRAPH_TEST_DATA) / name; }

inline nlohmann::json load_data(const std::string& name) {
  std::ifstream in(data_path(name));
  return nlohmann::json::parse(in);
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("tacgraph_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace test
