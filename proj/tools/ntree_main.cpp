#include <iostream>

#include "ntree/cli.hpp"

int main(int argc, char** argv) { return ntree::cli::run_cli(argc, argv, std::cout, std::cerr); }
