#pragma once

#include <string>
#include <vector>

namespace jetstab::cli {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitNoConvergence = 4;

// Arguments without the program name, e.g. {"dispersion", "--rho", "0.51", "--out", "d"}.
int run(const std::vector<std::string>& args);

}  // namespace jetstab::cli
