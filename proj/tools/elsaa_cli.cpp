#include "elsaa/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return elsaa::run_cli(argc, argv, std::cout, std::cerr); }
