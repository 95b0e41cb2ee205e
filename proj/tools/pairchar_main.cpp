#include <iostream>

#include "pairchar/cli.hpp"

int main(int argc, char** argv) { return pairchar::cli::run(argc, argv, std::cout, std::cerr); }
