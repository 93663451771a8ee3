#include <iostream>
#include <string>
#include <vector>

#include "modev/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return modev::run_cli(args, std::cout, std::cerr);
}
