#include <iostream>

#include "hgb/cli.hpp"

int main(int argc, char** argv) { return hgb::cli::main_entry(argc, argv, std::cout, std::cerr); }
