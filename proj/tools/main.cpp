#include <unistd.h>

#include <iostream>

#include "sv2/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return sv2::cli::run(args, std::cout, std::cerr, ::isatty(STDOUT_FILENO) != 0);
}
