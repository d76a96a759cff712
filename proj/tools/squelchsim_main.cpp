#include "squelchsim/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return squelchsim::cli::run(argc, argv, std::cout, std::cerr); }
