#include <iostream>

#include "itl/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return itl::cli::run(args, std::cout, std::cerr);
}
