#include <iostream>

#include "nmm/cli.hpp"

int main(int argc, char** argv) { return nmm::cli::run(argc, argv, std::cout, std::cerr); }
