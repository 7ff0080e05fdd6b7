#pragma once

#include <string>
#include <vector>

namespace flq::cli {

// Exit codes: 0 success, 2 validation/usage failure, 3 numerical
// escalation failure.
int run(std::vector<std::string> args);

}  // namespace flq::cli
