#include <iostream>

#include "pbvote/cli.hpp"

int main(int argc, char** argv) {
  return pbvote::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
