#include <iostream>
#include <string>
#include <vector>

#include "sigdesc/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return sigdesc::run_cli(args, std::cout, std::cerr);
}
