#pragma once

// The `qmoments` command line: subcommands, configuration, caching and the
// run ledger.

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace qmoments::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailedChecks = 1;
inline constexpr int kExitInvalidArgument = 2;
inline constexpr int kExitResourceLimit = 3;

/// Parses a non-negative count written as an integer or in scientific
/// notation ("1e7"). InvalidArgument for fractions, negatives or overflow.
std::uint64_t parse_count(const std::string& text);

/// $XDG_CACHE_HOME/qmoments, else $HOME/.cache/qmoments, else empty. The
/// QML_CACHE_DIR variable and --cache-dir take precedence over this.
std::filesystem::path default_cache_dir();

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace qmoments::app
