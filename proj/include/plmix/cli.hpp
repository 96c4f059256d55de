#ifndef PLMIX_CLI_HPP
#define PLMIX_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace plmix::cli {

/// Runs the command line `args` (without the program name). Returns the
/// process exit code: 0 success, 1 runtime failure, 2 usage or input error.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

/// 64-bit FNV-1a digest of a file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

}  // namespace plmix::cli

#endif  // PLMIX_CLI_HPP
