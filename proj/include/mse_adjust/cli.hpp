#ifndef MSE_ADJUST_CLI_HPP_
#define MSE_ADJUST_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace mse_adjust {

/// Exit statuses of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInternal = 3;

/// Runs the tool on `args` (program name first). Data goes to `out`, logs and
/// error messages to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mse_adjust

#endif  // MSE_ADJUST_CLI_HPP_
