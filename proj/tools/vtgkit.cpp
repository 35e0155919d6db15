#include <iostream>

#include "vtg/cli.hpp"

int main(int argc, char** argv) { return vtg::cli::run(argc, argv, std::cout, std::cerr); }
