#include <iostream>
#include <string>
#include <vector>

#include "restcheck/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return restcheck::run_cli(args, std::cout, std::cerr);
}
