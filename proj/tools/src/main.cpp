#include <iostream>

#include "glpd_tools/cli.hpp"

int main(int argc, char** argv) { return glpd::cli::cli_main(argc, argv, std::cout, std::cerr); }
