#include <iostream>

#include "wvic/cli.hpp"

int main(int argc, char** argv) {
    return wvic::run_cli(argc, argv, std::cout, std::cerr);
}
