#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "ssc/grid.hpp"

namespace ssc::testing {

/// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("ssc_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline GridGeometry cube_geometry(int n, double voxel_size = 0.02) {
  return GridGeometry{{n, n, n}, voxel_size, Eigen::Vector3d::Zero()};
}

}  // namespace ssc::testing
