#include <iostream>

#include "coexist/cli.hpp"

int main(int argc, char** argv)
{
    return coexist::cli_main(argc, argv, std::cout, std::cerr);
}
