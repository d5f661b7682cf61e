#include <iostream>

#include "robinhood/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return robinhood::cli::dispatch(args, std::cout, std::cerr);
}
