#ifndef SSYNC_CLI_HPP_
#define SSYNC_CLI_HPP_

#include <iosfwd>

namespace ssync {

/// Exit statuses of the ssync tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitViolation = 1,     // corpus found a hard violation
  kExitBadInput = 2,      // flags, automaton or trace failed to parse or validate
  kExitIo = 3,            // a file could not be read or written
  kExitInconsistent = 4,  // requested slope or base cannot be realized
};

/// Entry point of the `ssync` tool; argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ssync

#endif  // SSYNC_CLI_HPP_
