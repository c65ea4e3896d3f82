#include <iostream>
#include <string>
#include <vector>

#include "nxplay/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return nxplay::run_command(args, std::cout, std::cerr);
}
