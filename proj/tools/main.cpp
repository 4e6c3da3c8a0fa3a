#include <iostream>
#include <string>
#include <vector>

#include "sparsetw/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sparsetw::cli::dispatch(args, std::cout, std::cerr);
}
