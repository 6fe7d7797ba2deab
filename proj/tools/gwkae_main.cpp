#include <iostream>

#include "gwkae/cli.hpp"

int main(int argc, char** argv) { return gwkae::run_cli(argc, argv, std::cout, std::cerr); }
