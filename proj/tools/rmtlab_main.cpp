#include <iostream>

#include "rmt/cli.hpp"

int main(int argc, char** argv) { return rmt::cli::run(argc, argv, std::cout, std::cerr); }
