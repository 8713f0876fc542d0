#include <iostream>

#include "polyfield/cli.hpp"

int main(int argc, char** argv) { return polyfield::run(argc, argv, std::cout, std::cerr); }
