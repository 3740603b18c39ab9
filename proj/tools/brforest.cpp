#include <iostream>
#include <vector>

#include "brforest/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return brf::cli_main(args, std::cout, std::cerr);
}
