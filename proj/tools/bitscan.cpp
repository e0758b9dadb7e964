#include <iostream>

#include "bitscan/cli.hpp"

int main(int argc, char** argv) { return bitscan::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
