#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

namespace wcoda::cli {

/// Process exit statuses. Every failure also prints one JSON line starting with
/// `wcoda-error ` on stderr.
enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_parse = 2,
    exit_domain = 3,
    exit_io = 4,
    exit_internal = 5,
};

/// Runs one subcommand; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

} // namespace wcoda::cli
