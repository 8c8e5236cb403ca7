#ifndef AUDIOSCRIPT_CLI_HPP_
#define AUDIOSCRIPT_CLI_HPP_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "audioscript/backend.hpp"

namespace audioscript {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;  // parse, validation or compile failure
inline constexpr int kExitIo = 2;       // missing files, bad arguments
inline constexpr int kExitBackend = 3;
inline constexpr int kExitWriteFailed = 4;

struct ProjectConfig {
  std::optional<std::filesystem::path> voice_catalog;
  BackendConfig backend;
  std::filesystem::path output_dir = ".";
  std::optional<double> master_lufs;
  int jobs = 1;
};

// Reads a JSON config file, then applies AUDIOSCRIPT_BACKEND,
// AUDIOSCRIPT_JOBS and AUDIOSCRIPT_OUTPUT_DIR from the environment.
ProjectConfig load_project_config(
    const std::optional<std::filesystem::path>& path);

// Entry point behind the `audioscript` binary. `args` excludes argv[0].
int run_cli(const std::vector<std::string>& args, std::istream& in,
            std::ostream& out, std::ostream& err);

}  // namespace audioscript

#endif  // AUDIOSCRIPT_CLI_HPP_
