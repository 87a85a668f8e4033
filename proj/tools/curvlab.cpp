#include <string>
#include <vector>

#include "curvlab/cli.hpp"

int main(int argc, char** argv) {
  return curvlab::cli::run(std::vector<std::string>(argv, argv + argc));
}
