#include <iostream>
#include <string>
#include <vector>

#include "dupkit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return dupkit::cli::run(args, std::cout, std::cerr);
}
