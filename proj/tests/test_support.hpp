#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

namespace entroheat::testing {

inline std::string fixture(const std::string& name) {
  return std::string(ENTROHEAT_FIXTURES) + "/" + name;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("entroheat-test-" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Copies the fixture images and replay archives into `dir`.
inline void copy_scan_fixtures(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  for (const char* name : {"page.png", "adaptive.png", "nologprobs.png", "tiny.jsonl"}) {
    fs::copy_file(fixture(name), dir / name, fs::copy_options::overwrite_existing);
  }
  fs::copy(fixture("replay"), dir / "replay", fs::copy_options::recursive | fs::copy_options::overwrite_existing);
}

}  // namespace entroheat::testing
