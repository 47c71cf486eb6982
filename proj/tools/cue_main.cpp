#include "cue/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return cue::run_cli(args, std::cout, std::cerr);
}
