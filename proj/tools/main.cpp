#include <iostream>

#include "cnls/cli/commands.hpp"

int main(int argc, char** argv) { return cnls::cli::run(argc, argv, std::cout, std::cerr); }
