#include <iostream>
#include <string>
#include <vector>

#include "mse_adjust/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return mse_adjust::run_cli(args, std::cout, std::cerr);
}
