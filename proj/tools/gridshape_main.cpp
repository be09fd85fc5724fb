#include <iostream>

#include "gridshape/cli.hpp"

int main(int argc, char** argv) { return gridshape::cli::main_entry(argc, argv, std::cout, std::cerr); }
