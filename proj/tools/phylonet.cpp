#include <iostream>
#include <string>
#include <vector>

#include "phylonet/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return phylonet::cli::run(args, std::cout, std::cerr);
}
