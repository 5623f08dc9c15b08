#include <iostream>
#include <string>
#include <vector>

#include "kremu/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return kremu::cli::run(args, std::cout, std::cerr);
}
