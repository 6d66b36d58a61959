#include <iostream>

#include "cadyn/cli.hpp"

int main(int argc, char** argv) {
  return cadyn::cli::run(argc, argv, std::cout, std::cerr);
}
