#pragma once

#include <string>
#include <vector>

namespace unicon {

// Entry point shared by the binary and in-process tests. `args` excludes the
// program name. Exit codes: 0 success, 1 usage error, 2 data/runtime error,
// 3 failed gradient check.
int run_cli(const std::vector<std::string>& args);

}  // namespace unicon
