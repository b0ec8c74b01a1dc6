#include <iostream>
#include <string>
#include <vector>

#include "nkpower/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return nkpower::cli_dispatch(args, std::cout, std::cerr);
}
