#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eerq {

// Command-line entry point, separated from main() so tests can drive it.
// Exit codes: 0 success, 1 domain failure (chase does not exist for `check`,
// invalid schema for `validate`, inconsistency with --fail-on-inconsistent),
// 2 usage or input errors.
int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace eerq
