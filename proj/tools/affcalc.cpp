#include <iostream>

#include "affcalc/cli.hpp"

int main(int argc, char** argv) { return affcalc::cli::run(argc, argv, std::cout, std::cerr); }
