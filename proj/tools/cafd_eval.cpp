#include <iostream>
#include <string>
#include <vector>

#include "cafd/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cafd::run_cli(args, std::cout, std::cerr);
}
