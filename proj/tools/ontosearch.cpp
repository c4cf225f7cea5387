#include <iostream>

#include "ontosearch/cli.hpp"

int main(int argc, char** argv) { return ontosearch::cli_main(argc, argv, std::cout, std::cerr); }
