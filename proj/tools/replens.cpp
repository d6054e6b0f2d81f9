#include <iostream>

#include "replens/cli.hpp"

int main(int argc, char** argv)
{
    return replens::cli::run(argc, argv, std::cout, std::cerr);
}
