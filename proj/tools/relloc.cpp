#include <iostream>

#include "relloc/cli/runner.hpp"

int main(int argc, char** argv) { return relloc::cli::run(argc, argv, std::cout, std::cerr); }
