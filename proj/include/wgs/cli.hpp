#pragma once

namespace wgs {

/**
 * Entry point of the command-line tool (testable without a process spawn).
 * Subcommands: train | reference | eval | landscape.
 * Exit codes: 0 success, 2 usage/config error, 3 numerical failure.
 * The default output root comes from $WGS_OUT_ROOT (falling back to ".").
 */
int run_cli(int argc, const char* const* argv);

}  // namespace wgs
