#ifndef HLBVP_CLI_HPP
#define HLBVP_CLI_HPP

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

#include "hlbvp/config.hpp"

namespace hlbvp::cli {

// Stable exit-code contract: 0 success, 2 config error, 3 degenerate shift,
// 4 solver non-convergence.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDegenerate = 3;
inline constexpr int kExitNoConvergence = 4;

struct CommonFlags {
  std::optional<kernel::KernelMode> mode_override;
  bool quiet = false;
};

int cmd_analyze(const config::Setup& setup, const CommonFlags& flags, std::ostream& out);
int cmd_check_existence(const config::Setup& setup, const CommonFlags& flags, std::ostream& out);
int cmd_solve(const config::Setup& setup, const std::string& csv_path, const CommonFlags& flags,
              std::ostream& out);
// perturb_k is a debug hook: added to the built-in k so sensitivity of the
// comparison table can be demonstrated.
int cmd_reproduce_example(const CommonFlags& flags, std::ostream& out, double perturb_k = 0.0);

// The built-in example configuration used by reproduce-example.
std::string builtin_example_config();

// Maps thrown errors to the exit-code contract and prints the message.
int run_guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace hlbvp::cli

#endif
