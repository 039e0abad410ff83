#include <iostream>

#include "amreg/cli.hpp"

int main(int argc, char** argv) { return amreg::cli::run(argc, argv, std::cout, std::cerr); }
