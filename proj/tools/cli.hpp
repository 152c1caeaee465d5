#pragma once

#include <iosfwd>

namespace refcam::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;
inline constexpr int kExitFatal = 2;

/// Entry point of the refcam command line tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace refcam::cli
