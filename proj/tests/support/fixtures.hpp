#ifndef AUDIOSCRIPT_TESTS_FIXTURES_HPP_
#define AUDIOSCRIPT_TESTS_FIXTURES_HPP_

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace audioscript::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(AUDIOSCRIPT_FIXTURE_DIR) / name;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("missing fixture " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline std::string fixture_text(const std::string& name) {
  return read_text(fixture_path(name));
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir =
      std::filesystem::temp_directory_path() / ("audioscript_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace audioscript::testing

#endif  // AUDIOSCRIPT_TESTS_FIXTURES_HPP_
