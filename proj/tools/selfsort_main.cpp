#include <iostream>

#include "selfsort/cli.hpp"

int main(int argc, char** argv) {
    return selfsort::cli_main(argc, argv, std::cout, std::cerr);
}
