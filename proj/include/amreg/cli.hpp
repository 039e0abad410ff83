#pragma once

#include <ostream>

namespace amreg::cli {

/// Exit codes: 0 success, 2 usage error, 3 I/O error, 4 computation error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace amreg::cli
