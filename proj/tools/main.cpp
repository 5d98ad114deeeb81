#include <iostream>
#include <string>
#include <vector>

#include "storebench/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return storebench::dispatch(args, std::cout, std::cerr);
}
