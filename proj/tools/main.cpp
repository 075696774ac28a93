#include <iostream>

#include "sgin/cli.hpp"

int main(int argc, char** argv) { return sgin::cli::parse_and_dispatch(argc, argv, std::cout, std::cerr); }
