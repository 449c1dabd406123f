#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ouk {

/// Runs one command-line invocation against the given streams and returns
/// the process exit code: 0 success, 1 a verification suite failed, 2
/// invalid input, 3 a mathematical guard refused the computation.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err);

}  // namespace ouk
