#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace xltag::cli {

/// Exit statuses of the driver.
inline constexpr int kOk = 0;
inline constexpr int kInternalError = 1;
inline constexpr int kInputError = 2;
inline constexpr int kDiverged = 3;

/// Runs one command line (without the program name). Normal output goes to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Hex SHA-256 of a file's bytes.
std::string file_digest(const std::string &path);

}  // namespace xltag::cli
