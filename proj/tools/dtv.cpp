#include <iostream>
#include <string>
#include <vector>

#include "dtv/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dtv::run_cli(args, std::cout, std::cerr);
}
