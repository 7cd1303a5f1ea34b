#include <iostream>

#include "gradbound/cli.hpp"

int main(int argc, char** argv) { return gradbound::cli::main(argc, argv, std::cout, std::cerr); }
