#include <iostream>
#include <string>
#include <vector>

#include "isc/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return isc::run_cli(args, std::cout, std::cerr);
}
