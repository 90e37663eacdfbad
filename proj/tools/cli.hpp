#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace interx {

/// Entry point shared by the executable and the tests. argv[0] is the program name.
/// Returns 0 on success, 1 on data or validation failure, 2 on usage error.
int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace interx
