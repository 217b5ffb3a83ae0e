// The ctparse command line: one binary, one subcommand per pipeline stage.

#ifndef CTPARSE_CLI_H_
#define CTPARSE_CLI_H_

#include <stdexcept>
#include <string>
#include <vector>

namespace ctparse::cli {

// Bad invocation: exit status 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// `args` includes the program name. Returns the process exit status.
int Dispatch(const std::vector<std::string> &args);

}  // namespace ctparse::cli

#endif  // CTPARSE_CLI_H_
