#include <iostream>

#include "ssync/cli.hpp"

int main(int argc, char** argv) { return ssync::run_cli(argc, argv, std::cout, std::cerr); }
