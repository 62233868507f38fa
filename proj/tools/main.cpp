#include <iostream>
#include <string>
#include <vector>

#include "abstrip/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return abstrip::run_cli(args, std::cout, std::cerr);
}
