#include <iostream>

#include "cbrc/cli.hpp"

int main(int argc, char** argv) { return cbrc::cli::run_cli(argc, argv, std::cout, std::cerr); }
