#include <iostream>
#include <string>
#include <vector>

#include "hcf/cli.hpp"

int main(int argc, char** argv) {
  return hcf::cli::run_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
