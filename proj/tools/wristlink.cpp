#include <iostream>

#include "wristlink/cli.hpp"

int main(int argc, char** argv) { return wristlink::cli::run(argc, argv, std::cout, std::cerr); }
