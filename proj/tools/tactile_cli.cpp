#include "tactile/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return tactile::run_cli(argc, argv, std::cout, std::cerr);
}
