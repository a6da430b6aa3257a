#pragma once

namespace sff {

// Entry point for the command-line tool; returns the process exit code
// (0 success, 1 validation error, 2 I/O error).
int run_cli(int argc, char** argv);

}  // namespace sff
