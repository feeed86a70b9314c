#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>

#include "kschemo/mesh.hpp"

namespace testing_support {

inline kschemo::TriMesh square_mesh(double h) {
  kschemo::MeshOptions opts;
  opts.h_target = h;
  return kschemo::triangulate(kschemo::make_domain(kschemo::DomainPreset::unit_square), opts).mesh;
}

inline kschemo::TriMesh l_mesh(double h) {
  kschemo::MeshOptions opts;
  opts.h_target = h;
  return kschemo::triangulate(kschemo::make_domain(kschemo::DomainPreset::l_shape), opts).mesh;
}

// Fresh scratch directory, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag)
      : path_(std::filesystem::temp_directory_path() /
              ("kschemo_" + tag + "_" + std::to_string(::getpid()))) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace testing_support
