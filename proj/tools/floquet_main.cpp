#include <vector>
#include <string>

#include "flq/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return flq::cli::run(std::move(args));
}
