#include <iostream>

#include "liouville/cli_harness.hpp"

int main(int argc, char** argv) { return liouville::cli::parse_and_run(argc, argv, std::cout, std::cerr); }
