#include "ncpoa/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ncpoa::cli::main(argc, argv, std::cout, std::cerr); }
