#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace paraeval::cli {

/// Exit codes of `run`.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;
inline constexpr int kDataError = 2;
inline constexpr int kProviderError = 3;

/// Entry point behind the `paraeval` binary. `args` excludes the program
/// name. Results go to files named by --out, or to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Hex SHA-256 of a file's bytes. Throws IoError when unreadable.
std::string sha256_file(const std::string& path);

}  // namespace paraeval::cli
