#include <string>
#include <vector>

#include "unhaze/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return unhaze::cli::dispatch(args);
}
