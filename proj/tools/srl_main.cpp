#include <iostream>

#include "srl/cli.hpp"

int main(int argc, char** argv) { return srl::run_cli(argc, argv, std::cout, std::cerr); }
