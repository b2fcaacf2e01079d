#include <iostream>

#include "nrst/cli.hpp"

int main(int argc, char** argv) { return nrst::run_cli(argc, argv, std::cout, std::cerr); }
