#include <iostream>

#include "prefext/cli.hpp"

int main(int argc, char** argv) {
  return prefext::cli::dispatch(argc, argv, std::cout, std::cerr);
}
