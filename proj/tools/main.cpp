#include <iostream>

#include "imagestar/cli.hpp"

int main(int argc, char** argv) { return imagestar::cli::run(argc, argv, std::cout, std::cerr); }
