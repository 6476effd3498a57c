#include <iostream>

#include "wfem/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return wfem::run(args, std::cout, std::cerr);
}
