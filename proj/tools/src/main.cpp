#include "proxrl/cli/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return proxrl::cli::run(argc, argv, std::cout, std::cerr); }
