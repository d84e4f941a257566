#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace trinity::cli {

inline constexpr const char* kToolName = "trinity";
inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one subcommand. `args` excludes the program name. Results go to `out`,
/// diagnostics and error JSON to `err`.
///
/// Returns 0 on success, 1 on a domain error (error JSON on `err`), 2 on a usage
/// or invalid-argument error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

}  // namespace trinity::cli
