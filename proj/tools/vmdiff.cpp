#include <string>
#include <vector>

#include "vmdiff/cli.hpp"

int main(int argc, char** argv) {
  return vmdiff::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
