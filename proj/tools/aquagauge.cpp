#include <iostream>
#include <string>
#include <vector>

#include "aquagauge/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return aquagauge::cli::run(args, std::cout, std::cerr);
}
