#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace robinhood::cli {

// Exit codes: 0 success, 1 validation or usage error, 2 limit or verification failure.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace robinhood::cli
