#pragma once

namespace tg {

// Parses argv, runs one subcommand, reports errors on stderr.
// Exit status: 0 success, 1 validation or domain error, 2 I/O error.
int run_cli(int argc, char** argv);

}  // namespace tg
