#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eln::cli {

// Exit codes: 0 success, 1 operational error, 2 usage error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eln::cli
