#include <iostream>

#include "ctxnet/cli.hpp"

int main(int argc, char** argv) {
    return ctxnet::cli::main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
