#include <iostream>

#include "fdlab/cli.hpp"

int main(int argc, char** argv) {
    return fdlab::run_cli(argc, argv, std::cout, std::cerr);
}
