#include "cle/serve.hpp"

#include <iostream>

int main(int argc, char** argv) { return cle::serve::cli_main(argc, argv, std::cout, std::cerr); }
