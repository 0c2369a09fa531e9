#include <iostream>

#include "sigspline_cli/cli.hpp"

int main(int argc, char** argv) { return sigspline::cli::run(argc, argv, std::cout, std::cerr); }
