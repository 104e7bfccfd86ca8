#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace smoothnorm {

/**
 * @brief Command dispatcher behind the `smoothnorm` binary.
 *
 * `args` excludes the program name. Returns the process exit code:
 * 0 on success (a rejected null is data, not an error), 2 on input or
 * configuration errors, 3 on numerical failures.
 */
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace smoothnorm
