#pragma once

#include <string>

namespace amreg {

/// Value rounded to 6 decimal places, with negative zero folded to zero.
double round6(double v);
/// "%.6f" of round6(v).
std::string fixed6(double v);

}  // namespace amreg
