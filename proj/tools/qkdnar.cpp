#include <iostream>
#include <string>
#include <vector>

#include "qkdnar/cli.hpp"

int main(int argc, char** argv) {
  return qkdnar::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
