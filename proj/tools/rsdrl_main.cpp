#include <iostream>
#include <string>
#include <vector>

#include "rsdrl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rsdrl::run_cli(args, std::cout, std::cerr);
}
