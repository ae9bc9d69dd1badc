#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace esrlab::cli {

struct Request {
  std::string command;
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;  // overrides [run] seed
  std::filesystem::path out_dir = ".";
};

const std::vector<std::string>& commands();
std::string usage();

/// Executes one subcommand. Artifacts and manifest.txt land in out_dir;
/// failures print a one-line JSON error record to `err` and return 2 (config),
/// 3 (data) or 4 (fit).
int run(const Request& request, std::ostream& log, std::ostream& err);

}  // namespace esrlab::cli
