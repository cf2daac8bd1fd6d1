#include "securelat/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return securelat::cli::run(argc, argv, std::cout, std::cerr); }
