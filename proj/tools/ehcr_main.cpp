#include <iostream>
#include <string>
#include <vector>

#include "ehcr/config.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ehcr::run_cli(args, std::cout, std::cerr);
}
