#include <iostream>

#include "particle_limits/cli.hpp"

int main(int argc, char** argv) {
  return particle_limits::cli::run_main(argc, argv, std::cout, std::cerr);
}
