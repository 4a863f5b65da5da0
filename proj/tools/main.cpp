#include <iostream>

#include "lexrule/cli.hpp"

int main(int argc, char** argv) {
  return lexrule::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
