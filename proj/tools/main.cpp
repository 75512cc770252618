#include <iostream>

#include "eln/cli.hpp"

int main(int argc, char** argv) {
    return eln::cli::run(argc, argv, std::cout, std::cerr);
}
